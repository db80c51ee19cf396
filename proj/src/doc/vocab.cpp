#include "vgt/doc/vocab.h"

#include <cctype>
#include <fstream>
#include <stdexcept>

namespace vgt::doc {

Vocab::Vocab(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  static const char* kReserved[] = {"[PAD]", "[MASK]", "[UNK]", "[CLS]"};
  if (tokens_.size() < 4) throw std::invalid_argument("vocab needs at least the four reserved tokens");
  for (int i = 0; i < 4; ++i) {
    if (tokens_[i] != kReserved[i]) {
      throw std::invalid_argument("vocab entry " + std::to_string(i) + " must be " + kReserved[i] + ", got " +
                                  tokens_[i]);
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("duplicate vocab entry: " + tokens_[i]);
    }
  }
}

Vocab Vocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocab file " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    tokens.push_back(line);
  }
  return Vocab(std::move(tokens));
}

std::optional<int> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Vocab::whole_word_ids() const {
  std::vector<int> ids;
  for (int i = kCls + 1; i < static_cast<int>(tokens_.size()); ++i) {
    if (!is_continuation(i)) ids.push_back(i);
  }
  return ids;
}

std::vector<int> tokenize(std::string_view word, const Vocab& vocab, std::size_t max_chars) {
  std::string text(word);
  for (auto& ch : text) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (text.empty() || text.size() > max_chars) return {Vocab::kUnk};

  std::vector<int> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.size();
    std::optional<int> hit;
    while (start < end) {
      std::string piece = text.substr(start, end - start);
      if (start > 0) piece = "##" + piece;
      hit = vocab.find(piece);
      if (hit) break;
      --end;
    }
    if (!hit) return {Vocab::kUnk};
    out.push_back(*hit);
    start = end;
  }
  return out;
}

std::string detokenize(const std::vector<int>& ids, const Vocab& vocab) {
  std::string out;
  for (int id : ids) {
    const std::string& t = vocab.token(id);
    out += t.rfind("##", 0) == 0 ? t.substr(2) : t;
  }
  return out;
}

}  // namespace vgt::doc
