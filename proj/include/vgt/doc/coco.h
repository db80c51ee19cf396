#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "vgt/doc/types.h"

namespace vgt::doc {

struct CocoImage {
  long id = 0;
  std::string file_name;
  int width = 0, height = 0;
};

/// One ground-truth object. `image` indexes CocoDataset::images and
/// `category` is the contiguous class index.
struct CocoObject {
  long id = 0;
  std::size_t image = 0;
  int category = 0;
  BoxF box;
};

struct CocoDataset {
  std::vector<std::string> category_names;  // by contiguous index
  std::vector<long> category_ids;           // original COCO ids, ascending
  std::vector<CocoImage> images;
  std::vector<CocoObject> objects;

  std::size_t num_classes() const { return category_names.size(); }
  /// Objects of one image, in file order.
  std::vector<CocoObject> objects_of(std::size_t image) const;
};

BoxF xywh_to_xyxy(const std::array<double, 4>& xywh);
std::array<double, 4> xyxy_to_xywh(const BoxF& box);

/// Category ids are remapped to [0, K) in ascending id order. Unknown image
/// or category references are errors.
CocoDataset parse_coco(std::string_view text);
std::string dump_coco(const CocoDataset& dataset);
CocoDataset load_coco(const std::filesystem::path& path);
void save_coco(const std::filesystem::path& path, const CocoDataset& dataset);

}  // namespace vgt::doc
