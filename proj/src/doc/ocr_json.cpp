#include "vgt/doc/ocr_json.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vgt/doc/png_io.h"

namespace vgt::doc {

using nlohmann::json;

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError("missing field " + where + "." + key);
  return *it;
}

int int_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw FormatError("field " + where + "." + key + " must be an integer");
  return v.get<int>();
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw FormatError("field " + where + "." + key + " must be a string");
  return v.get<std::string>();
}

PixelBox box_field(const json& obj, const std::string& where) {
  const json& v = field(obj, "box", where);
  if (!v.is_array() || v.size() != 4) throw FormatError("field " + where + ".box must be [x0,y0,x1,y1]");
  int c[4];
  for (int i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw FormatError("field " + where + ".box must hold numbers");
    c[i] = round_half_up(v[i].get<double>());
  }
  return {c[0], c[1], c[2], c[3]};
}

}  // namespace

PageWords parse_ocr_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed OCR-JSON: ") + e.what());
  }
  PageWords page;
  const json& pg = field(doc, "page", "root");
  page.height = int_field(pg, "h", "page");
  page.width = int_field(pg, "w", "page");
  if (page.width <= 0 || page.height <= 0) throw FormatError("field page.w/page.h must be positive");

  const json& words = field(doc, "words", "root");
  if (!words.is_array()) throw FormatError("field root.words must be an array");
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::string where = "words[" + std::to_string(i) + "]";
    page.words.push_back({string_field(words[i], "text", where), box_field(words[i], where)});
  }

  if (auto it = doc.find("lines"); it != doc.end()) {
    if (!it->is_array()) throw FormatError("field root.lines must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "lines[" + std::to_string(i) + "]";
      Segment seg;
      seg.text = string_field((*it)[i], "text", where);
      const json& ids = field((*it)[i], "words", where);
      if (!ids.is_array()) throw FormatError("field " + where + ".words must be an array");
      for (const auto& id : ids) {
        if (!id.is_number_unsigned() && !id.is_number_integer()) {
          throw FormatError("field " + where + ".words must hold word indices");
        }
        const long w = id.get<long>();
        if (w < 0 || static_cast<std::size_t>(w) >= page.words.size()) {
          throw FormatError("field " + where + ".words references missing word " + std::to_string(w));
        }
        seg.words.push_back(static_cast<std::size_t>(w));
      }
      page.lines.push_back(std::move(seg));
    }
  }
  return page;
}

std::string dump_ocr_json(const PageWords& page) {
  json doc;
  doc["page"] = {{"h", page.height}, {"w", page.width}};
  json words = json::array();
  for (const auto& w : page.words) {
    words.push_back({{"text", w.text}, {"box", {w.box.x0, w.box.y0, w.box.x1, w.box.y1}}});
  }
  doc["words"] = std::move(words);
  if (!page.lines.empty()) {
    json lines = json::array();
    for (const auto& l : page.lines) {
      lines.push_back({{"text", l.text}, {"box", {l.box.x0, l.box.y0, l.box.x1, l.box.y1}}, {"words", l.words}});
    }
    doc["lines"] = std::move(lines);
  }
  return doc.dump(1) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

DocPage load_ocr_page(const std::filesystem::path& path, const Vocab& vocab, int model_width, int model_height) {
  PageWords words;
  try {
    words = parse_ocr_json(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  DocPage page = build_page(words, vocab, model_width, model_height);
  auto raster = path;
  raster.replace_extension(".png");
  if (std::filesystem::exists(raster)) {
    page.image = resize_image(read_png(raster), static_cast<std::size_t>(page.height),
                              static_cast<std::size_t>(page.width));
  }
  return page;
}

}  // namespace vgt::doc
