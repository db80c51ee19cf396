#include "vgt/doc/coco.h"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "vgt/doc/ocr_json.h"

namespace vgt::doc {

using nlohmann::json;

std::vector<CocoObject> CocoDataset::objects_of(std::size_t image) const {
  std::vector<CocoObject> out;
  for (const auto& o : objects) {
    if (o.image == image) out.push_back(o);
  }
  return out;
}

BoxF xywh_to_xyxy(const std::array<double, 4>& xywh) {
  return {xywh[0], xywh[1], xywh[0] + xywh[2], xywh[1] + xywh[3]};
}

std::array<double, 4> xyxy_to_xywh(const BoxF& box) { return {box.x0, box.y0, box.width(), box.height()}; }

namespace {

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError("COCO: missing field " + where + "." + key);
  return obj.at(key);
}

long need_id(const json& obj, const char* key, const std::string& where) {
  const json& v = need(obj, key, where);
  if (!v.is_number_integer()) throw FormatError("COCO: field " + where + "." + key + " must be an integer");
  return v.get<long>();
}

}  // namespace

CocoDataset parse_coco(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed COCO JSON: ") + e.what());
  }
  CocoDataset ds;

  std::map<long, std::string> categories;
  const json& cats = need(doc, "categories", "root");
  for (std::size_t i = 0; i < cats.size(); ++i) {
    const std::string where = "categories[" + std::to_string(i) + "]";
    const long id = need_id(cats[i], "id", where);
    const json& name = need(cats[i], "name", where);
    if (!categories.emplace(id, name.get<std::string>()).second) {
      throw FormatError("COCO: duplicate category id " + std::to_string(id));
    }
  }
  std::map<long, int> category_index;
  for (const auto& [id, name] : categories) {
    category_index[id] = static_cast<int>(ds.category_ids.size());
    ds.category_ids.push_back(id);
    ds.category_names.push_back(name);
  }

  std::map<long, std::size_t> image_index;
  const json& images = need(doc, "images", "root");
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = "images[" + std::to_string(i) + "]";
    CocoImage img;
    img.id = need_id(images[i], "id", where);
    img.file_name = images[i].value("file_name", "");
    img.width = static_cast<int>(need_id(images[i], "width", where));
    img.height = static_cast<int>(need_id(images[i], "height", where));
    if (!image_index.emplace(img.id, ds.images.size()).second) {
      throw FormatError("COCO: duplicate image id " + std::to_string(img.id));
    }
    ds.images.push_back(std::move(img));
  }

  const json& anns = need(doc, "annotations", "root");
  for (std::size_t i = 0; i < anns.size(); ++i) {
    const std::string where = "annotations[" + std::to_string(i) + "]";
    CocoObject obj;
    obj.id = need_id(anns[i], "id", where);
    const long image_id = need_id(anns[i], "image_id", where);
    const long category_id = need_id(anns[i], "category_id", where);
    auto img = image_index.find(image_id);
    if (img == image_index.end()) {
      throw FormatError("COCO: " + where + " references unknown image " + std::to_string(image_id));
    }
    auto cat = category_index.find(category_id);
    if (cat == category_index.end()) {
      throw FormatError("COCO: " + where + " references unknown category " + std::to_string(category_id));
    }
    const json& bbox = need(anns[i], "bbox", where);
    if (!bbox.is_array() || bbox.size() != 4) throw FormatError("COCO: " + where + ".bbox must have 4 numbers");
    obj.image = img->second;
    obj.category = cat->second;
    obj.box = xywh_to_xyxy({bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                            bbox[3].get<double>()});
    ds.objects.push_back(obj);
  }
  return ds;
}

std::string dump_coco(const CocoDataset& ds) {
  json doc;
  json cats = json::array();
  for (std::size_t k = 0; k < ds.category_names.size(); ++k) {
    cats.push_back({{"id", ds.category_ids.at(k)}, {"name", ds.category_names[k]}});
  }
  json images = json::array();
  for (const auto& img : ds.images) {
    images.push_back({{"id", img.id}, {"file_name", img.file_name}, {"width", img.width}, {"height", img.height}});
  }
  json anns = json::array();
  for (const auto& o : ds.objects) {
    const auto xywh = xyxy_to_xywh(o.box);
    anns.push_back({{"id", o.id},
                    {"image_id", ds.images.at(o.image).id},
                    {"category_id", ds.category_ids.at(static_cast<std::size_t>(o.category))},
                    {"bbox", xywh},
                    {"area", xywh[2] * xywh[3]},
                    {"iscrowd", 0}});
  }
  doc["categories"] = std::move(cats);
  doc["images"] = std::move(images);
  doc["annotations"] = std::move(anns);
  return doc.dump(1) + "\n";
}

CocoDataset load_coco(const std::filesystem::path& path) {
  try {
    return parse_coco(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_coco(const std::filesystem::path& path, const CocoDataset& dataset) {
  write_text_file(path, dump_coco(dataset));
}

}  // namespace vgt::doc
