#include "vgt/doc/synth.h"

#include <algorithm>
#include <cstdio>
#include <random>

#include "vgt/doc/ocr_json.h"
#include "vgt/doc/png_io.h"

namespace vgt::doc {

namespace {

constexpr std::uint8_t kPaper = 255;
constexpr std::uint8_t kInk = 110;
constexpr std::uint8_t kRule = 40;

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Region content in local coordinates before placement.
struct Draft {
  int category = 0;
  RegionKind kind = RegionKind::TextLow;
  int width = 0, height = 0;
  std::vector<Word> words;
  std::vector<std::vector<std::size_t>> lines;  // indices into words
  std::vector<PixelBox> rules;                  // filled with kRule
  bool textured = false;
};

/// Per-page word pools drawn without replacement so that lines never repeat
/// a word within one page.
class WordPools {
 public:
  WordPools(const Vocab& vocab) {
    const auto ids = vocab.whole_word_ids();
    if (ids.size() < 2) throw std::invalid_argument("synth: vocab needs at least two whole words");
    const auto half = ids.size() / 2;
    for (std::size_t i = 0; i < ids.size(); ++i) (i < half ? low_ : high_).push_back(vocab.token(ids[i]));
  }

  std::string draw(RegionKind kind, Rng& rng) {
    if (kind == RegionKind::TextLow) return take(low_, rng);
    if (kind == RegionKind::TextHigh) return take(high_, rng);
    // Tables use the whole list: pick the half first so both stay balanced.
    if (low_.empty() && high_.empty()) throw std::runtime_error("synth: word pool exhausted");
    if (low_.empty()) return take(high_, rng);
    if (high_.empty()) return take(low_, rng);
    return take(uniform(rng, 0, 1) == 0 ? low_ : high_, rng);
  }

 private:
  static std::string take(std::vector<std::string>& pool, Rng& rng) {
    if (pool.empty()) throw std::runtime_error("synth: word pool exhausted");
    const auto i = static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(pool.size()) - 1));
    std::string word = pool[i];
    pool.erase(pool.begin() + static_cast<long>(i));
    return word;
  }

  std::vector<std::string> low_, high_;
};

Draft draft_text(const SynthConfig& cfg, Rng& rng, WordPools& pools, RegionKind kind) {
  Draft d;
  d.kind = kind;
  const int lines = uniform(rng, cfg.min_lines, cfg.max_lines);
  for (int l = 0; l < lines; ++l) {
    const std::string text = pools.draw(kind, rng);
    const int count = uniform(rng, cfg.min_words_per_line, cfg.max_words_per_line);
    const int y0 = l * (cfg.line_height + cfg.line_gap);
    int x = 0;
    std::vector<std::size_t> line;
    for (int w = 0; w < count; ++w) {
      const int width = uniform(rng, cfg.min_word_width, cfg.max_word_width);
      line.push_back(d.words.size());
      d.words.push_back({text, {x, y0, x + width, y0 + cfg.line_height}});
      x += width + cfg.word_gap;
    }
    d.width = std::max(d.width, x - cfg.word_gap);
    d.lines.push_back(std::move(line));
  }
  d.height = lines * cfg.line_height + (lines - 1) * cfg.line_gap;
  return d;
}

Draft draft_table(const SynthConfig& cfg, Rng& rng, WordPools& pools) {
  Draft d;
  d.kind = RegionKind::Table;
  const int rows = uniform(rng, 2, 4);
  const int cols = uniform(rng, 2, 3);
  const int cell_w = cfg.max_word_width + 4;
  const int cell_h = cfg.line_height + 4;
  d.width = cols * cell_w + 1;
  d.height = rows * cell_h + 1;
  for (int r = 0; r <= rows; ++r) d.rules.push_back({0, r * cell_h, d.width, r * cell_h + 1});
  for (int c = 0; c <= cols; ++c) d.rules.push_back({c * cell_w, 0, c * cell_w + 1, d.height});
  for (int r = 0; r < rows; ++r) {
    const std::string text = pools.draw(RegionKind::Table, rng);
    std::vector<std::size_t> line;
    for (int c = 0; c < cols; ++c) {
      const int width = uniform(rng, cfg.min_word_width, cfg.max_word_width);
      const int x0 = c * cell_w + 2;
      const int y0 = r * cell_h + 2;
      line.push_back(d.words.size());
      d.words.push_back({text, {x0, y0, x0 + width, y0 + cfg.line_height}});
    }
    d.lines.push_back(std::move(line));
  }
  return d;
}

Draft draft_figure(Rng& rng) {
  Draft d;
  d.kind = RegionKind::Figure;
  d.width = uniform(rng, 12, 28);
  d.height = uniform(rng, 12, 24);
  d.textured = true;
  return d;
}

bool separated(const PixelBox& a, const PixelBox& b, int margin) {
  return a.x1 + margin <= b.x0 || b.x1 + margin <= a.x0 || a.y1 + margin <= b.y0 || b.y1 + margin <= a.y0;
}

PixelBox shifted(const PixelBox& b, int dx, int dy) { return {b.x0 + dx, b.y0 + dy, b.x1 + dx, b.y1 + dy}; }

void fill(Image& img, const PixelBox& box, std::uint8_t value) {
  for (int y = box.y0; y < box.y1; ++y) {
    for (int x = box.x0; x < box.x1; ++x) {
      for (std::size_t c = 0; c < img.channels; ++c) img.at(std::size_t(y), std::size_t(x), c) = value;
    }
  }
}

}  // namespace

RegionKind region_kind(const std::string& name) {
  if (name == "Table") return RegionKind::Table;
  if (name == "Figure") return RegionKind::Figure;
  if (name == "RegionKV") return RegionKind::TextHigh;
  return RegionKind::TextLow;
}

SynthPage synth_generate(const SynthConfig& cfg, const Vocab& vocab, std::uint64_t seed) {
  if (cfg.classes.empty()) throw std::invalid_argument("synth: no classes");
  if (cfg.min_regions < 1 || cfg.max_regions < cfg.min_regions) throw std::invalid_argument("synth: region range");
  Rng rng(seed);
  const int size = cfg.page_size;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    WordPools pools(vocab);
    const int count = uniform(rng, cfg.min_regions, cfg.max_regions);
    std::vector<Draft> drafts;
    std::vector<PixelBox> placed;
    bool ok = true;
    for (int r = 0; r < count && ok; ++r) {
      const int category = uniform(rng, 0, static_cast<int>(cfg.classes.size()) - 1);
      const RegionKind kind = region_kind(cfg.classes[std::size_t(category)]);
      Draft d = kind == RegionKind::Table    ? draft_table(cfg, rng, pools)
                : kind == RegionKind::Figure ? draft_figure(rng)
                                             : draft_text(cfg, rng, pools, kind);
      d.category = category;
      ok = false;
      const int max_x = size - d.width - 1;
      const int max_y = size - d.height - 1;
      if (max_x < 1 || max_y < 1) break;
      for (int tries = 0; tries < cfg.max_attempts; ++tries) {
        const PixelBox box{uniform(rng, 1, max_x), uniform(rng, 1, max_y), 0, 0};
        const PixelBox full{box.x0, box.y0, box.x0 + d.width, box.y0 + d.height};
        if (std::all_of(placed.begin(), placed.end(),
                        [&](const PixelBox& p) { return separated(p, full, cfg.region_margin); })) {
          placed.push_back(full);
          drafts.push_back(std::move(d));
          ok = true;
          break;
        }
      }
    }
    if (!ok) continue;

    SynthPage out;
    out.words.width = size;
    out.words.height = size;
    Image image{std::size_t(size), std::size_t(size), 3,
                std::vector<std::uint8_t>(std::size_t(size) * std::size_t(size) * 3, kPaper)};
    for (std::size_t r = 0; r < drafts.size(); ++r) {
      const Draft& d = drafts[r];
      const int dx = placed[r].x0, dy = placed[r].y0;
      SynthRegion region{d.category, placed[r]};
      if (d.textured) {
        for (int y = placed[r].y0; y < placed[r].y1; ++y) {
          for (int x = placed[r].x0; x < placed[r].x1; ++x) {
            const auto v = static_cast<std::uint8_t>(uniform(rng, 30, 90));
            for (int c = 0; c < 3; ++c) image.at(std::size_t(y), std::size_t(x), std::size_t(c)) = v;
          }
        }
      }
      for (const auto& rule : d.rules) fill(image, shifted(rule, dx, dy), kRule);
      const std::size_t base = out.words.words.size();
      for (const auto& w : d.words) {
        const PixelBox box = shifted(w.box, dx, dy);
        fill(image, box, kInk);
        out.words.words.push_back({w.text, box});
      }
      if (d.kind == RegionKind::TextLow || d.kind == RegionKind::TextHigh) {
        PixelBox tight = out.words.words[base].box;
        for (std::size_t i = base; i < out.words.words.size(); ++i) {
          const auto& b = out.words.words[i].box;
          tight = {std::min(tight.x0, b.x0), std::min(tight.y0, b.y0), std::max(tight.x1, b.x1),
                   std::max(tight.y1, b.y1)};
        }
        region.box = tight;
      }
      for (const auto& line : d.lines) {
        Segment seg;
        for (std::size_t w : line) {
          const Word& word = out.words.words[base + w];
          seg.text += (seg.words.empty() ? "" : " ") + word.text;
          seg.box = seg.words.empty() ? word.box
                                      : PixelBox{std::min(seg.box.x0, word.box.x0), std::min(seg.box.y0, word.box.y0),
                                                 std::max(seg.box.x1, word.box.x1), std::max(seg.box.y1, word.box.y1)};
          seg.words.push_back(base + w);
        }
        out.words.lines.push_back(std::move(seg));
      }
      out.regions.push_back(region);
    }
    out.page = build_page(out.words, vocab);
    out.page.image = std::move(image);
    return out;
  }
  throw std::runtime_error("synth: could not pack regions after " + std::to_string(cfg.max_attempts) +
                           " attempts (seed " + std::to_string(seed) + ")");
}

std::uint64_t page_seed(std::uint64_t corpus_seed, std::size_t index) {
  // splitmix64 of (seed, index)
  std::uint64_t z = corpus_seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::string page_stem(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "page_%04zu", i);
  return buf;
}

CocoDataset annotations_for(const SynthConfig& cfg, const std::vector<SynthPage>& pages) {
  CocoDataset ds;
  for (std::size_t k = 0; k < cfg.classes.size(); ++k) {
    ds.category_names.push_back(cfg.classes[k]);
    ds.category_ids.push_back(static_cast<long>(k) + 1);
  }
  long next_id = 1;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    ds.images.push_back({static_cast<long>(i) + 1, "pages/" + page_stem(i) + ".png", cfg.page_size, cfg.page_size});
    for (const auto& r : pages[i].regions) ds.objects.push_back({next_id++, i, r.category, to_boxf(r.box)});
  }
  return ds;
}

}  // namespace

void write_corpus(const std::filesystem::path& dir, const SynthConfig& cfg, const std::vector<SynthPage>& pages) {
  std::filesystem::create_directories(dir / "pages");
  for (std::size_t i = 0; i < pages.size(); ++i) {
    write_png(dir / "pages" / (page_stem(i) + ".png"), pages[i].page.image);
    write_text_file(dir / "pages" / (page_stem(i) + ".json"), dump_ocr_json(pages[i].words));
  }
  save_coco(dir / "annotations.json", annotations_for(cfg, pages));
}

Corpus load_corpus(const std::filesystem::path& dir, const Vocab& vocab, int model_size) {
  Corpus corpus;
  corpus.annotations = load_coco(dir / "annotations.json");
  for (const auto& img : corpus.annotations.images) {
    auto ocr = dir / img.file_name;
    ocr.replace_extension(".json");
    DocPage page = load_ocr_page(ocr, vocab, model_size, model_size);
    if (page.image.empty()) throw FormatError("missing raster for " + ocr.string());
    corpus.pages.push_back(std::move(page));
  }
  if (model_size > 0) {
    // Ground truth follows the page into model pixels.
    for (auto& obj : corpus.annotations.objects) {
      const auto& img = corpus.annotations.images[obj.image];
      const double sx = double(model_size) / img.width;
      const double sy = double(model_size) / img.height;
      obj.box = {obj.box.x0 * sx, obj.box.y0 * sy, obj.box.x1 * sx, obj.box.y1 * sy};
    }
  }
  return corpus;
}

Corpus synth_corpus(const SynthConfig& cfg, const Vocab& vocab, std::uint64_t seed, std::size_t count) {
  std::vector<SynthPage> pages;
  for (std::size_t i = 0; i < count; ++i) pages.push_back(synth_generate(cfg, vocab, page_seed(seed, i)));
  Corpus corpus;
  corpus.annotations = annotations_for(cfg, pages);
  for (auto& p : pages) corpus.pages.push_back(std::move(p.page));
  return corpus;
}

}  // namespace vgt::doc
