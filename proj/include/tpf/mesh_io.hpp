// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// OBJ and PLY mesh files.
///
/// Export writes either
///   * OBJ: `v x y z [r g b]`, `vn nx ny nz`, then `f a//a b//b c//c` (or
///     `f a b c` without normals). Reals use the shortest round-trip decimal form.
///   * PLY: binary_little_endian 1.0 with vertex properties double x, y, z,
///     [double nx, ny, nz], [uchar red, green, blue] and faces as
///     `list uchar int vertex_indices`.
/// Import accepts both, plus plain OBJ (polygons are fan-triangulated) and
/// ascii PLY with any numeric property types.

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/mesh.hpp"

namespace tpf {

enum class MeshFormat { Obj, Ply };

inline MeshFormat parse_mesh_format(const std::string& s) {
  if (s == "obj") return MeshFormat::Obj;
  if (s == "ply") return MeshFormat::Ply;
  throw InvalidArgument("unknown mesh format '" + s + "' (expected obj or ply)");
}

inline std::string to_string(MeshFormat f) { return f == MeshFormat::Obj ? "obj" : "ply"; }

/// Format implied by the file extension (.obj / .ply, case-sensitive).
inline MeshFormat mesh_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".obj") return MeshFormat::Obj;
  if (ext == ".ply") return MeshFormat::Ply;
  throw InvalidArgument("cannot infer mesh format from '" + path.string() + "'");
}

namespace detail {

inline void append_real(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

inline std::uint8_t color_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline std::string encode_obj(const TriMesh& mesh) {
  validate_mesh(mesh);
  std::string out = "# tpf mesh\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out += "v";
    for (int a = 0; a < 3; ++a) {
      out += ' ';
      detail::append_real(out, v[a]);
    }
    if (mesh.has_colors())
      for (double c : mesh.colors[i]) {
        out += ' ';
        detail::append_real(out, c);
      }
    out += '\n';
  }
  for (const auto& n : mesh.normals) {
    out += "vn";
    for (int a = 0; a < 3; ++a) {
      out += ' ';
      detail::append_real(out, n[a]);
    }
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += 'f';
    for (auto idx : f) {
      const std::string s = std::to_string(idx + 1);
      out += ' ';
      out += s;
      if (mesh.has_normals()) out += "//" + s;
    }
    out += '\n';
  }
  return out;
}

inline std::string encode_ply(const TriMesh& mesh) {
  validate_mesh(mesh);
  std::string out =
      "ply\nformat binary_little_endian 1.0\ncomment tpf mesh\nelement vertex " + std::to_string(mesh.vertices.size()) +
      "\nproperty double x\nproperty double y\nproperty double z\n";
  if (mesh.has_normals()) out += "property double nx\nproperty double ny\nproperty double nz\n";
  if (mesh.has_colors()) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "element face " + std::to_string(mesh.faces.size()) + "\nproperty list uchar int vertex_indices\nend_header\n";
  const auto put = [&](auto v) {
    char b[sizeof(v)];
    std::memcpy(b, &v, sizeof(v));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(v));
    out.append(b, sizeof(v));
  };
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (int a = 0; a < 3; ++a) put(mesh.vertices[i][a]);
    if (mesh.has_normals())
      for (int a = 0; a < 3; ++a) put(mesh.normals[i][a]);
    if (mesh.has_colors())
      for (double c : mesh.colors[i]) put(detail::color_byte(c));
  }
  for (const auto& f : mesh.faces) {
    put(std::uint8_t{3});
    for (auto idx : f) put(static_cast<std::int32_t>(idx));
  }
  return out;
}

inline void export_mesh(const TriMesh& mesh, MeshFormat format, const std::filesystem::path& path) {
  detail::write_file(path, format == MeshFormat::Obj ? encode_obj(mesh) : encode_ply(mesh));
}

namespace detail {

inline void finish_import(TriMesh& mesh, const std::string& source) {
  for (auto& n : mesh.normals) {
    const double len = norm(n);
    if (len > 0.0 && std::abs(len - 1.0) > 1e-6) n = n * (1.0 / len);
  }
  try {
    validate_mesh(mesh);
  } catch (const InvalidArgument& e) {
    throw ParseError(source + ": " + e.what());
  }
}

inline double parse_real(std::string_view tok, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(where + ": expected a number, found '" + std::string(tok) + "'");
  return v;
}

inline long long parse_int(std::string_view tok, const std::string& where) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ParseError(where + ": expected an integer, found '" + std::string(tok) + "'");
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t s = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > s) out.push_back(line.substr(s, i - s));
  }
  return out;
}

}  // namespace detail

inline TriMesh decode_obj(const std::string& text, const std::string& source = "obj") {
  TriMesh mesh;
  std::vector<Vec3> vn;
  std::vector<std::pair<std::uint32_t, long long>> normal_refs;  // (vertex, normal index)
  int colored = -1;
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto tok = detail::split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok[0] == "v") {
      if (tok.size() != 4 && tok.size() != 7) throw ParseError(where + ": vertex needs 3 or 6 values");
      const int has = tok.size() == 7 ? 1 : 0;
      if (colored >= 0 && colored != has) throw ParseError(where + ": mixed colored and uncolored vertices");
      colored = has;
      mesh.vertices.push_back(
          {detail::parse_real(tok[1], where), detail::parse_real(tok[2], where), detail::parse_real(tok[3], where)});
      if (has)
        mesh.colors.push_back(
            {detail::parse_real(tok[4], where), detail::parse_real(tok[5], where), detail::parse_real(tok[6], where)});
    } else if (tok[0] == "vn") {
      if (tok.size() != 4) throw ParseError(where + ": normal needs 3 values");
      vn.push_back(
          {detail::parse_real(tok[1], where), detail::parse_real(tok[2], where), detail::parse_real(tok[3], where)});
    } else if (tok[0] == "f") {
      if (tok.size() < 4) throw ParseError(where + ": face needs at least 3 vertices");
      std::vector<std::uint32_t> poly;
      for (std::size_t t = 1; t < tok.size(); ++t) {
        const std::string_view ref = tok[t];
        const std::size_t slash = ref.find('/');
        long long vi = detail::parse_int(ref.substr(0, slash), where);
        const long long nv = static_cast<long long>(mesh.vertices.size());
        if (vi < 0) vi += nv + 1;
        if (vi < 1 || vi > nv)
          throw ParseError(where + ": face " + std::to_string(mesh.faces.size()) + " references vertex " +
                           std::string(ref.substr(0, slash)) + " but only " + std::to_string(nv) +
                           " vertices are defined");
        poly.push_back(static_cast<std::uint32_t>(vi - 1));
        if (slash != std::string_view::npos) {
          const std::size_t slash2 = ref.find('/', slash + 1);
          if (slash2 != std::string_view::npos && slash2 + 1 < ref.size()) {
            long long ni = detail::parse_int(ref.substr(slash2 + 1), where);
            if (ni < 0) ni += static_cast<long long>(vn.size()) + 1;
            if (ni < 1 || ni > static_cast<long long>(vn.size()))
              throw ParseError(where + ": face " + std::to_string(mesh.faces.size()) + " references missing normal " +
                               std::to_string(ni));
            normal_refs.emplace_back(poly.back(), ni - 1);
          }
        }
      }
      for (std::size_t t = 1; t + 1 < poly.size(); ++t) mesh.faces.push_back({poly[0], poly[t], poly[t + 1]});
    }
    // Other statements (o, g, s, usemtl, vt, ...) carry nothing we keep.
  }
  if (!normal_refs.empty()) {
    mesh.normals.assign(mesh.vertices.size(), kFallbackNormal);
    for (const auto& [v, ni] : normal_refs) mesh.normals[v] = vn[static_cast<std::size_t>(ni)];
  }
  detail::finish_import(mesh, source);
  return mesh;
}

namespace detail {

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string count_type;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

inline std::size_t ply_type_size(const std::string& t, const std::string& where) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw ParseError(where + ": unknown property type '" + t + "'");
}

class PlyValueReader {
 public:
  PlyValueReader(const std::string& data, std::size_t offset, bool binary, std::string source, std::size_t line)
      : data_(data), pos_(offset), line_(line), binary_(binary), source_(std::move(source)) {}

  double read(const std::string& type) {
    if (!binary_) return read_ascii();
    const std::size_t n = ply_type_size(type, source_);
    if (pos_ + n > data_.size()) throw ParseError(source_ + ": truncated binary data at byte offset " + std::to_string(pos_));
    unsigned char b[8];
    std::memcpy(b, data_.data() + pos_, n);
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + n);
    pos_ += n;
    const auto get = [&](auto v) {
      std::memcpy(&v, b, sizeof(v));
      return static_cast<double>(v);
    };
    if (type == "char" || type == "int8") return get(std::int8_t{});
    if (type == "uchar" || type == "uint8") return get(std::uint8_t{});
    if (type == "short" || type == "int16") return get(std::int16_t{});
    if (type == "ushort" || type == "uint16") return get(std::uint16_t{});
    if (type == "int" || type == "int32") return get(std::int32_t{});
    if (type == "uint" || type == "uint32") return get(std::uint32_t{});
    if (type == "float" || type == "float32") return get(float{});
    return get(double{});
  }

  std::size_t offset() const { return pos_; }
  std::string where() const {
    return binary_ ? source_ + ": byte offset " + std::to_string(pos_) : source_ + ":" + std::to_string(line_);
  }

 private:
  double read_ascii() {
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      if (data_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= data_.size()) throw ParseError(source_ + ":" + std::to_string(line_) + ": unexpected end of file");
    const std::size_t s = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    return parse_real(std::string_view(data_.data() + s, pos_ - s), source_ + ":" + std::to_string(line_));
  }

  const std::string& data_;
  std::size_t pos_;
  std::size_t line_;
  bool binary_;
  std::string source_;
};

}  // namespace detail

inline TriMesh decode_ply(const std::string& data, const std::string& source = "ply") {
  std::vector<detail::PlyElement> elements;
  std::string format;
  std::size_t pos = 0, line_no = 0;
  bool header_done = false;
  while (pos < data.size()) {
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) throw ParseError(source + ": header is not terminated by end_header");
    const std::string_view line(data.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto tok = detail::split_ws(line);
    if (line_no == 1) {
      if (tok.size() != 1 || tok[0] != "ply") throw ParseError(where + ": missing 'ply' magic");
      continue;
    }
    if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "format") {
      if (tok.size() != 3) throw ParseError(where + ": malformed format line");
      format = std::string(tok[1]);
      if (format != "ascii" && format != "binary_little_endian")
        throw ParseError(where + ": unsupported format '" + format + "'");
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(where + ": malformed element line");
      elements.push_back({std::string(tok[1]), static_cast<std::size_t>(detail::parse_int(tok[2], where)), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(where + ": property before any element");
      detail::PlyProperty p;
      if (tok.size() == 5 && tok[1] == "list") {
        p.is_list = true;
        p.count_type = std::string(tok[2]);
        p.type = std::string(tok[3]);
        p.name = std::string(tok[4]);
        detail::ply_type_size(p.count_type, where);
      } else if (tok.size() == 3) {
        p.type = std::string(tok[1]);
        p.name = std::string(tok[2]);
      } else {
        throw ParseError(where + ": malformed property line");
      }
      detail::ply_type_size(p.type, where);
      elements.back().properties.push_back(std::move(p));
    } else if (tok[0] == "end_header") {
      header_done = true;
      break;
    } else {
      throw ParseError(where + ": unexpected header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!header_done) throw ParseError(source + ": header is not terminated by end_header");
  if (format.empty()) throw ParseError(source + ": missing format line");

  TriMesh mesh;
  detail::PlyValueReader reader(data, pos, format != "ascii", source, line_no + 1);
  for (const auto& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    int xi[3] = {-1, -1, -1}, ni[3] = {-1, -1, -1}, ci[3] = {-1, -1, -1};
    bool color_bytes = true;
    for (std::size_t k = 0; k < el.properties.size(); ++k) {
      const auto& nm = el.properties[k].name;
      const char* axes[3] = {"x", "y", "z"};
      const char* naxes[3] = {"nx", "ny", "nz"};
      const char* caxes[3] = {"red", "green", "blue"};
      for (int a = 0; a < 3; ++a) {
        if (nm == axes[a]) xi[a] = static_cast<int>(k);
        if (nm == naxes[a]) ni[a] = static_cast<int>(k);
        if (nm == caxes[a]) {
          ci[a] = static_cast<int>(k);
          color_bytes = el.properties[k].type == "uchar" || el.properties[k].type == "uint8";
        }
      }
    }
    if (is_vertex && (xi[0] < 0 || xi[1] < 0 || xi[2] < 0))
      throw ParseError(source + ": vertex element lacks x/y/z properties");
    const bool has_n = ni[0] >= 0 && ni[1] >= 0 && ni[2] >= 0;
    const bool has_c = ci[0] >= 0 && ci[1] >= 0 && ci[2] >= 0;
    std::vector<double> vals(el.properties.size());
    for (std::size_t r = 0; r < el.count; ++r) {
      std::vector<std::uint32_t> poly;
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        const auto& p = el.properties[k];
        if (!p.is_list) {
          vals[k] = reader.read(p.type);
          continue;
        }
        const double cnt = reader.read(p.count_type);
        if (cnt < 0 || cnt != std::floor(cnt)) throw ParseError(reader.where() + ": invalid list length");
        for (int t = 0; t < static_cast<int>(cnt); ++t) {
          const double idx = reader.read(p.type);
          if (is_face && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            if (idx < 0 || idx >= static_cast<double>(mesh.vertices.size()) || idx != std::floor(idx))
              throw ParseError(reader.where() + ": face " + std::to_string(mesh.faces.size()) + " references vertex " +
                               std::to_string(static_cast<long long>(idx)) + " but the mesh has " +
                               std::to_string(mesh.vertices.size()) + " vertices");
            poly.push_back(static_cast<std::uint32_t>(idx));
          }
        }
      }
      if (is_vertex) {
        mesh.vertices.push_back({vals[xi[0]], vals[xi[1]], vals[xi[2]]});
        if (has_n) mesh.normals.push_back({vals[ni[0]], vals[ni[1]], vals[ni[2]]});
        if (has_c) {
          const double s = color_bytes ? 1.0 / 255.0 : 1.0;
          mesh.colors.push_back({vals[ci[0]] * s, vals[ci[1]] * s, vals[ci[2]] * s});
        }
      } else if (is_face) {
        if (poly.size() < 3) throw ParseError(reader.where() + ": face with fewer than 3 vertices");
        for (std::size_t t = 1; t + 1 < poly.size(); ++t) mesh.faces.push_back({poly[0], poly[t], poly[t + 1]});
      }
    }
  }
  if (format != "ascii" && reader.offset() != data.size())
    throw ParseError(source + ": " + std::to_string(data.size() - reader.offset()) +
                     " unexpected trailing bytes at byte offset " + std::to_string(reader.offset()));
  detail::finish_import(mesh, source);
  return mesh;
}

inline TriMesh import_mesh(const std::filesystem::path& path) {
  const std::string data = detail::read_file(path);
  if (data.rfind("ply", 0) == 0) return decode_ply(data, path.string());
  return decode_obj(data, path.string());
}

}  // namespace tpf
