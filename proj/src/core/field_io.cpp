#include "core/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace qpat {

static_assert(std::endian::native == std::endian::little,
              "payload format is little-endian; big-endian hosts need byte swaps");

static void write_bytes_atomic(const std::string& path, const char* data,
                               std::size_t n) {
  fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out.write(data, static_cast<std::streamsize>(n));
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename failed: " + target.string() + ": " + ec.message());
}

void write_text_atomic(const std::string& path, const std::string& text) {
  write_bytes_atomic(path, text.data(), text.size());
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

static std::string payload_name(const fs::path& header) {
  fs::path p = header.filename();
  p.replace_extension(".f64");
  return p.string();
}

void write_field(const ScalarField& f, const std::string& header_path) {
  if (!f.all_finite()) throw IoError("refusing to write non-finite field");
  const Grid& g = f.grid();
  fs::path hp(header_path);
  std::string payload = payload_name(hp);

  json header;
  header["dims"] = {g.dims()[0], g.dims()[1], g.dims()[2]};
  header["spacing"] = {g.spacing().x, g.spacing().y, g.spacing().z};
  header["origin"] = {g.origin().x, g.origin().y, g.origin().z};
  header["dtype"] = "f64le";
  header["order"] = "C";
  header["payload"] = payload;

  fs::path pp = hp.parent_path() / payload;
  write_bytes_atomic(pp.string(),
                     reinterpret_cast<const char*>(f.values().data()),
                     f.values().size() * sizeof(double));
  write_text_atomic(header_path, header.dump(2) + "\n");
}

ScalarField read_field(const std::string& header_path) {
  json header;
  try {
    header = json::parse(read_text(header_path));
  } catch (const json::exception& e) {
    throw IoError("bad field header " + header_path + ": " + e.what());
  }
  try {
    if (header.at("dtype").get<std::string>() != "f64le")
      throw IoError("unsupported dtype in " + header_path);
    if (header.at("order").get<std::string>() != "C")
      throw IoError("unsupported order in " + header_path);
    Index3 dims{header.at("dims").at(0).get<std::int64_t>(),
                header.at("dims").at(1).get<std::int64_t>(),
                header.at("dims").at(2).get<std::int64_t>()};
    Vec3 spacing{header.at("spacing").at(0).get<double>(),
                 header.at("spacing").at(1).get<double>(),
                 header.at("spacing").at(2).get<double>()};
    Vec3 origin{header.at("origin").at(0).get<double>(),
                header.at("origin").at(1).get<double>(),
                header.at("origin").at(2).get<double>()};
    Grid g(dims, spacing, origin);

    fs::path pp = fs::path(header_path).parent_path() /
                  header.at("payload").get<std::string>();
    std::ifstream in(pp, std::ios::binary);
    if (!in) throw IoError("cannot open payload: " + pp.string());
    std::vector<double> v(g.size());
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != v.size() * sizeof(double))
      throw IoError("payload truncated: " + pp.string());
    return ScalarField(g, std::move(v));
  } catch (const json::exception& e) {
    throw IoError("bad field header " + header_path + ": " + e.what());
  }
}

}  // namespace qpat
