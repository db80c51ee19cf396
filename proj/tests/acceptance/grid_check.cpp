#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "acceptance.h"
#include "vgt/doc/page.h"
#include "vgt/doc/synth.h"
#include "vgt/grid/grid.h"

namespace vgt::acceptance {

namespace {

using doc::PixelBox;
using doc::SubToken;
using doc::Vocab;

// Id the grid should hold at (x, y): the last token whose half-open box
// contains the cell, or [PAD].
int expected_cell(const std::vector<SubToken>& tokens, int x, int y) {
  int id = Vocab::kPad;
  for (const auto& t : tokens) {
    if (t.box.x0 <= x && x < t.box.x1 && t.box.y0 <= y && y < t.box.y1) id = t.token_id;
  }
  return id;
}

bool grid_matches(const grid::TokenIdGrid& g, const std::vector<SubToken>& tokens) {
  for (int y = 0; y < int(g.height); ++y) {
    for (int x = 0; x < int(g.width); ++x) {
      if (g.at(std::size_t(y), std::size_t(x)) != expected_cell(tokens, x, y)) return false;
    }
  }
  return true;
}

std::vector<SubToken> random_tokens(std::mt19937_64& rng, int h, int w, int count, bool disjoint) {
  std::vector<SubToken> out;
  for (int tries = 0; tries < 400 && int(out.size()) < count; ++tries) {
    const int x0 = int(rng() % std::uint64_t(w - 1)), y0 = int(rng() % std::uint64_t(h - 1));
    const PixelBox b{x0, y0, std::min(w, x0 + 1 + int(rng() % 6)), std::min(h, y0 + 1 + int(rng() % 4))};
    bool clear = true;
    for (const auto& t : out) clear &= b.x1 <= t.box.x0 || t.box.x1 <= b.x0 || b.y1 <= t.box.y0 || t.box.y1 <= b.y0;
    if (clear || !disjoint) out.push_back({4 + int(rng() % 60), b, out.size()});
  }
  return out;
}

}  // namespace

Outcome check_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> failures;
  std::mt19937_64 rng(2024);

  // Cell counts equal box areas on disjoint layouts, [PAD] elsewhere.
  std::size_t layouts = 0;
  for (int trial = 0; trial < 500; ++trial, ++layouts) {
    const int h = 8 + int(rng() % 40), w = 8 + int(rng() % 40);
    const auto tokens = random_tokens(rng, h, w, 1 + int(rng() % 20), true);
    const auto g = grid::build_token_id_grid(tokens, std::size_t(h), std::size_t(w));
    std::map<int, long> area;
    long covered = 0;
    for (const auto& t : tokens) {
      area[t.token_id] += t.box.area();
      covered += t.box.area();
    }
    bool ok = grid_matches(g, tokens);
    for (const auto& [id, a] : area) ok &= std::count(g.ids.begin(), g.ids.end(), id) == a;
    ok &= std::count(g.ids.begin(), g.ids.end(), Vocab::kPad) == long(h) * w - covered;
    if (!ok) {
      failures.push_back("disjoint layout " + std::to_string(trial));
      break;
    }
  }
  // Overlapping layouts: the later token owns shared cells.
  for (int trial = 0; trial < 300; ++trial, ++layouts) {
    const int h = 8 + int(rng() % 24), w = 8 + int(rng() % 24);
    const auto tokens = random_tokens(rng, h, w, 2 + int(rng() % 15), false);
    if (!grid_matches(grid::build_token_id_grid(tokens, std::size_t(h), std::size_t(w)), tokens)) {
      failures.push_back("overlap layout " + std::to_string(trial));
      break;
    }
  }

  // Synthetic pages: grid semantics and sub-word splitting of every word.
  std::size_t pages = 0, words = 0, split_words = 0;
  for (const char* vocab_file : {"/vocab_64.txt", "/vocab_1000.txt"}) {
    const auto vocab = Vocab::load(std::string(VGT_DATA_DIR) + vocab_file);
    auto pages_to_check = doc::synth_corpus({}, vocab, 99, 40).pages;
    // Same layouts with letter suffixes, so words break into several pieces.
    for (std::size_t i = 0, n = pages_to_check.size(); i < n; ++i) {
      doc::PageWords input{pages_to_check[i].width, pages_to_check[i].height, pages_to_check[i].words, {}};
      for (std::size_t w = 0; w < input.words.size(); ++w) input.words[w].text += std::string(1 + w % 3, char('a' + w % 26));
      pages_to_check.push_back(doc::build_page(input, vocab));
    }
    for (const auto& page : pages_to_check) {
      ++pages;
      if (!grid_matches(grid::build_token_id_grid(page, std::size_t(page.height), std::size_t(page.width)),
                        page.tokens)) {
        failures.push_back("synthetic page grid");
        break;
      }
      std::map<std::size_t, std::vector<PixelBox>> pieces;
      for (const auto& t : page.tokens) pieces[t.parent_word].push_back(t.box);
      for (const auto& [w, boxes] : pieces) {
        ++words;
        split_words += boxes.size() > 1 ? 1 : 0;
        if (boxes != doc::split_word_box(page.words[w].box, boxes.size())) failures.push_back("word split on page");
      }
    }
  }
  // Equal-width splitting on random boxes: tiles exactly, all pieces but the
  // last share floor(width / n).
  for (int trial = 0; trial < 2000; ++trial) {
    const int x0 = int(rng() % 50), y0 = int(rng() % 50);
    const PixelBox box{x0, y0, x0 + 1 + int(rng() % 60), y0 + 1 + int(rng() % 10)};
    const std::size_t n = 1 + rng() % std::size_t(box.width());
    const auto parts = doc::split_word_box(box, n);
    bool ok = parts.size() == n && parts.front().x0 == box.x0 && parts.back().x1 == box.x1;
    long area = 0;
    for (std::size_t i = 0; ok && i < parts.size(); ++i) {
      ok &= parts[i].y0 == box.y0 && parts[i].y1 == box.y1 && parts[i].valid();
      if (i > 0) ok &= parts[i].x0 == parts[i - 1].x1;
      if (i + 1 < parts.size()) ok &= parts[i].width() == box.width() / int(n);
      area += parts[i].area();
    }
    if (!ok || area != box.area()) {
      failures.push_back("split_word_box trial " + std::to_string(trial));
      break;
    }
  }

  // Masking statistics over 1,000 seeds.
  std::vector<SubToken> line;
  for (int i = 0; i < 100; ++i) line.push_back({4 + i % 60, {i * 2, 0, i * 2 + 2, 4}, std::size_t(i)});
  double selected = 0;
  std::map<grid::MaskAction, double> actions;
  bool counts_ok = true;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto m = grid::apply_mglm_mask(line, 64, {}, seed);
    counts_ok &= m.plan.entries.size() == 15;
    selected += double(m.plan.entries.size());
    for (const auto& e : m.plan.entries) {
      actions[e.action] += 1;
      if (e.action == grid::MaskAction::Mask) counts_ok &= e.replacement == Vocab::kMask;
      if (e.action == grid::MaskAction::Keep) counts_ok &= e.replacement == e.original;
      if (e.action == grid::MaskAction::Random) counts_ok &= e.replacement > Vocab::kCls;
    }
  }
  const double mask = actions[grid::MaskAction::Mask] / selected;
  const double random = actions[grid::MaskAction::Random] / selected;
  const double keep = actions[grid::MaskAction::Keep] / selected;
  if (!counts_ok) failures.push_back("mask selection count or replacement");
  if (std::abs(mask - 0.8) > 0.01 || std::abs(random - 0.1) > 0.01 || std::abs(keep - 0.1) > 0.01) {
    failures.push_back("mask action shares");
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (seconds >= 30.0) failures.push_back("runtime over 30 s");
  std::ostringstream os;
  os.precision(4);
  os << layouts << " layouts, " << pages << " pages, " << words << " words (" << split_words
     << " split); mask/random/keep " << mask << "/" << random << "/" << keep << " over 1000 seeds; " << seconds
     << " s";
  for (const auto& f : failures) os << "; failed: " << f;
  return {failures.empty(), os.str()};
}

}  // namespace vgt::acceptance
