#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vgt/doc/coco.h"
#include "vgt/doc/page.h"

namespace vgt::doc {

/// How a synthetic class is drawn.
enum class RegionKind {
  TextLow,   // gray word blocks, tokens from the lower half of the word list
  TextHigh,  // same rendering, tokens from the upper half
  Table,     // ruled cells with one word per cell, tokens from the whole list
  Figure,    // textured dark fill, no tokens
};

/// RegionKV draws from the upper half, Table and Figure are special, every
/// other name is low-half text.
RegionKind region_kind(const std::string& class_name);

struct SynthConfig {
  int page_size = 64;
  std::vector<std::string> classes = {"ParaText", "RegionKV", "Table", "Figure"};
  int min_regions = 2;
  int max_regions = 4;
  int min_lines = 2;
  int max_lines = 5;
  int min_words_per_line = 2;
  int max_words_per_line = 4;
  int line_height = 4;
  int line_gap = 2;
  int min_word_width = 5;
  int max_word_width = 8;
  int word_gap = 2;
  int region_margin = 2;
  int max_attempts = 64;
};

struct SynthRegion {
  int category = 0;  // index into SynthConfig::classes
  PixelBox box;      // tight box around the rendered content
};

struct SynthPage {
  PageWords words;
  DocPage page;
  std::vector<SynthRegion> regions;
};

/// Deterministic for a fixed (config, vocab, seed). Regions never overlap and
/// keep at least region_margin pixels between them.
SynthPage synth_generate(const SynthConfig& config, const Vocab& vocab, std::uint64_t seed);

/// Seed of the i-th page of a corpus.
std::uint64_t page_seed(std::uint64_t corpus_seed, std::size_t index);

/// A corpus is pages/page_NNNN.{png,json} plus annotations.json (COCO).
void write_corpus(const std::filesystem::path& dir, const SynthConfig& config,
                  const std::vector<SynthPage>& pages);

struct Corpus {
  std::vector<DocPage> pages;
  CocoDataset annotations;  // images[i] describes pages[i]
};

Corpus load_corpus(const std::filesystem::path& dir, const Vocab& vocab, int model_size = 0);

/// Builds a corpus in memory without touching the disk.
Corpus synth_corpus(const SynthConfig& config, const Vocab& vocab, std::uint64_t seed, std::size_t count);

}  // namespace vgt::doc
