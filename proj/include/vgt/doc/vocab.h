#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vgt::doc {

/// Ordered token list with fixed reserved ids.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kMask = 1;
  static constexpr int kUnk = 2;
  static constexpr int kCls = 3;

  /// The first four entries must be [PAD], [MASK], [UNK], [CLS].
  explicit Vocab(std::vector<std::string> tokens);
  static Vocab load(const std::filesystem::path& path);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view token) const;
  bool is_reserved(int id) const { return id >= 0 && id <= kCls; }
  bool is_continuation(int id) const { return token(id).rfind("##", 0) == 0; }

  /// Non-reserved entries that are not "##" continuation pieces, in id order.
  std::vector<int> whole_word_ids() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Greedy longest-match-first WordPiece segmentation of one lowercased word.
/// Falls back to a single [UNK] when the word cannot be covered.
std::vector<int> tokenize(std::string_view word, const Vocab& vocab, std::size_t max_chars = 100);

/// Joins pieces back into a word, stripping continuation markers.
std::string detokenize(const std::vector<int>& ids, const Vocab& vocab);

}  // namespace vgt::doc
