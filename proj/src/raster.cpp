#include "mhc/raster.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "mhc/error.hpp"

namespace mhc {

namespace {

constexpr const char* kModule = "raster";

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path, const char* op) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::input, kModule, op, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_png_signature(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

// ---- PNG -------------------------------------------------------------------

struct PngRaw {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int color_type = 0;
  int interlace = 0;
  std::vector<std::uint8_t> pixels;  // packed rows as stored, big-endian for 16-bit
};

struct MemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (src->offset + length > src->bytes.size()) png_error(png, "truncated stream");
  std::copy_n(src->bytes.data() + src->offset, length, out);
  src->offset += length;
}

struct PngMessage {
  char text[256] = {0};
};

void png_error_to_buffer(png_structp png, png_const_charp message) {
  auto* msg = static_cast<PngMessage*>(png_get_error_ptr(png));
  std::snprintf(msg->text, sizeof(msg->text), "%s", message);
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

// Two-pass decode: header first, then rows into a buffer sized from it. No
// object with a destructor lives across setjmp.
bool decode_png(std::span<const std::uint8_t> bytes, PngRaw& raw, PngMessage& msg) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &msg, png_error_to_buffer,
                                           png_warning_ignore);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  MemoryReader reader{bytes, 0};
  std::vector<png_bytep>* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, png_read_from_memory);
  png_read_info(png, info);
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.bit_depth = png_get_bit_depth(png, info);
  raw.color_type = png_get_color_type(png, info);
  raw.interlace = png_get_interlace_type(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  raw.pixels.assign(stride * static_cast<std::size_t>(raw.height), 0);
  rows = new std::vector<png_bytep>(static_cast<std::size_t>(raw.height));
  for (int y = 0; y < raw.height; ++y) (*rows)[y] = raw.pixels.data() + stride * y;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  delete rows;
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

PngRaw read_png(std::span<const std::uint8_t> bytes, const char* op) {
  PngRaw raw;
  PngMessage msg;
  if (!decode_png(bytes, raw, msg))
    throw FormatError(kModule, op, std::string("png decode failed: ") + msg.text);
  if (raw.interlace != PNG_INTERLACE_NONE)
    throw FormatError(kModule, op, "interlace: only non-interlaced PNG is supported");
  return raw;
}

struct PngWriter {
  std::vector<std::uint8_t>* out;
};

void png_write_to_memory(png_structp png, png_bytep data, png_size_t length) {
  auto* w = static_cast<PngWriter*>(png_get_io_ptr(png));
  w->out->insert(w->out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

bool encode_png_impl(int width, int height, int bit_depth, int color_type,
                     const std::vector<std::uint8_t>& pixels, std::size_t stride,
                     std::vector<std::uint8_t>& out, PngMessage& msg) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &msg, png_error_to_buffer,
                                            png_warning_ignore);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  PngWriter writer{&out};
  std::vector<png_bytep>* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    delete rows;
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &writer, png_write_to_memory, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  rows = new std::vector<png_bytep>(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    (*rows)[y] = const_cast<png_bytep>(pixels.data() + stride * y);
  png_write_image(png, rows->data());
  png_write_end(png, nullptr);
  delete rows;
  png_destroy_write_struct(&png, &info);
  return true;
}

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               int color_type, const std::vector<std::uint8_t>& pixels, std::size_t stride,
               const char* op) {
  std::vector<std::uint8_t> out;
  PngMessage msg;
  if (!encode_png_impl(width, height, bit_depth, color_type, pixels, stride, out, msg))
    throw Error(ErrorKind::internal, kModule, op, std::string("png encode failed: ") + msg.text);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::input, kModule, op, "cannot write '" + path.string() + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

// ---- PPM -------------------------------------------------------------------

// Reads one whitespace-delimited header token, skipping '#' comments.
bool next_token(std::span<const std::uint8_t> bytes, std::size_t& pos, std::string& token) {
  token.clear();
  while (pos < bytes.size()) {
    const char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
    token.push_back(static_cast<char>(bytes[pos++]));
  return !token.empty();
}

int parse_header_int(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* field) {
  std::string token;
  if (!next_token(bytes, pos, token) || pos >= bytes.size())
    throw FormatError(kModule, "load_image", std::string("ppm header truncated at ") + field);
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size() || v <= 0) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw FormatError(kModule, "load_image", std::string("ppm ") + field + " invalid: '" + token + "'");
  }
}

Image read_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  std::string magic;
  if (!next_token(bytes, pos, magic) || magic != "P6")
    throw FormatError(kModule, "load_image", "magic: expected P6 or PNG signature");
  const int width = parse_header_int(bytes, pos, "width");
  const int height = parse_header_int(bytes, pos, "height");
  const int maxval = parse_header_int(bytes, pos, "maxval");
  if (maxval != 255)
    throw FormatError(kModule, "load_image", "maxval: only 8-bit (255) is supported, got " +
                                                 std::to_string(maxval));
  ++pos;  // single whitespace after maxval
  const std::size_t need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() < pos + need)
    throw FormatError(kModule, "load_image", "samples: truncated pixel data");
  return Image(width, height, std::vector<std::uint8_t>(bytes.begin() + pos, bytes.begin() + pos + need));
}

void write_ppm(const Image& image, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::input, kModule, "save_image", "cannot write '" + path.string() + "'");
  f << "P6\n" << image.width() << ' ' << image.height() << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.samples().data()),
          static_cast<std::streamsize>(image.samples().size()));
}

// ---- CSV -------------------------------------------------------------------

LabelGrid read_csv_grid(std::span<const std::uint8_t> bytes, const char* op) {
  std::vector<std::vector<std::int32_t>> rows;
  std::string text(bytes.begin(), bytes.end());
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::int32_t> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        const long v = std::stol(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size() || v < 0 || v > INT32_MAX) throw std::invalid_argument(cell);
        row.push_back(static_cast<std::int32_t>(v));
      } catch (const std::exception&) {
        throw FormatError(kModule, op, "label at line " + std::to_string(line_no) + " invalid: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(kModule, op, "ragged rows: line " + std::to_string(line_no) + " has " +
                                         std::to_string(row.size()) + " cells, expected " +
                                         std::to_string(rows.front().size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw FormatError(kModule, op, "empty label map");
  LabelGrid grid(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t y = 0; y < rows.size(); ++y)
    for (std::size_t x = 0; x < rows[y].size(); ++x) grid(y, x) = rows[y][x];
  return grid;
}

void write_csv_grid(const LabelGrid& grid, const std::filesystem::path& path, const char* op) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::input, kModule, op, "cannot write '" + path.string() + "'");
  for (Eigen::Index y = 0; y < grid.rows(); ++y) {
    for (Eigen::Index x = 0; x < grid.cols(); ++x) {
      if (x) f << ',';
      f << grid(y, x);
    }
    f << '\n';
  }
}

LabelGrid read_grid_any(const std::filesystem::path& path, const char* op) {
  const auto bytes = read_bytes(path, op);
  if (!has_png_signature(bytes)) return read_csv_grid(bytes, op);
  const PngRaw raw = read_png(bytes, op);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY)
    throw FormatError(kModule, op, "color_type: label PNG must be grayscale, got " + std::to_string(raw.color_type));
  if (raw.bit_depth != 16)
    throw FormatError(kModule, op, "bit_depth: label PNG must be 16-bit, got " + std::to_string(raw.bit_depth));
  LabelGrid grid(raw.height, raw.width);
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x) {
      const std::size_t i = 2 * (static_cast<std::size_t>(y) * raw.width + x);
      grid(y, x) = (raw.pixels[i] << 8) | raw.pixels[i + 1];
    }
  return grid;
}

void write_grid_any(const LabelGrid& grid, const std::filesystem::path& path, const char* op) {
  if (lower_extension(path) != ".png") {
    write_csv_grid(grid, path, op);
    return;
  }
  if (grid.size() > 0 && (grid.maxCoeff() > 65535 || grid.minCoeff() < 0))
    throw Error(ErrorKind::input, kModule, op,
                "label count exceeds 65535: 16-bit PNG cannot hold label " + std::to_string(grid.maxCoeff()));
  const auto w = static_cast<std::size_t>(grid.cols());
  std::vector<std::uint8_t> pixels(2 * w * static_cast<std::size_t>(grid.rows()));
  for (Eigen::Index y = 0; y < grid.rows(); ++y)
    for (Eigen::Index x = 0; x < grid.cols(); ++x) {
      const auto v = static_cast<std::uint32_t>(grid(y, x));
      pixels[2 * (y * w + x)] = static_cast<std::uint8_t>(v >> 8);
      pixels[2 * (y * w + x) + 1] = static_cast<std::uint8_t>(v & 0xff);
    }
  write_png(path, static_cast<int>(grid.cols()), static_cast<int>(grid.rows()), 16,
            PNG_COLOR_TYPE_GRAY, pixels, 2 * w, op);
}

}  // namespace

// ---- Image -----------------------------------------------------------------

Image::Image(int width, int height)
    : Image(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0) * 3, 0)) {}

Image::Image(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width < 1 || height < 1)
    throw Error(ErrorKind::input, kModule, "image", "dimensions must be positive, got " +
                                                        std::to_string(width) + "x" + std::to_string(height));
  if (samples_.size() != static_cast<std::size_t>(width) * height * 3)
    throw Error(ErrorKind::input, kModule, "image", "sample count does not match width*height*3");
}

Plane Image::gray() const {
  Plane out(height_, width_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) {
      const Rgb c = at(x, y);
      out(y, x) = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
    }
  return out;
}

// ---- LabelMap --------------------------------------------------------------

int connected_components(const LabelGrid& raw, LabelGrid& out) {
  const auto h = raw.rows();
  const auto w = raw.cols();
  out.setConstant(h, w, -1);
  int next = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (out(y, x) >= 0) continue;
      const std::int32_t value = raw(y, x);
      out(y, x) = next;
      stack.assign(1, {y, x});
      while (!stack.empty()) {
        const auto [cy, cx] = stack.back();
        stack.pop_back();
        constexpr int dx[4] = {1, -1, 0, 0};
        constexpr int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const Eigen::Index ny = cy + dy[k];
          const Eigen::Index nx = cx + dx[k];
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          if (out(ny, nx) >= 0 || raw(ny, nx) != value) continue;
          out(ny, nx) = next;
          stack.emplace_back(ny, nx);
        }
      }
      ++next;
    }
  return next;
}

LabelMap LabelMap::from_grid(const LabelGrid& raw) {
  if (raw.rows() < 1 || raw.cols() < 1)
    throw Error(ErrorKind::input, kModule, "label_map", "empty grid");
  if (raw.minCoeff() < 0) throw Error(ErrorKind::input, kModule, "label_map", "negative label");
  LabelGrid dense;
  const int count = connected_components(raw, dense);
  return LabelMap(std::move(dense), count);
}

std::vector<int> LabelMap::region_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(region_count_), 0);
  for (Eigen::Index i = 0; i < labels_.size(); ++i) ++sizes[labels_.data()[i]];
  return sizes;
}

// ---- file I/O --------------------------------------------------------------

Image load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path, "load_image");
  if (!has_png_signature(bytes)) return read_ppm(bytes);
  const PngRaw raw = read_png(bytes, "load_image");
  if (raw.bit_depth != 8)
    throw FormatError(kModule, "load_image", "bit_depth: expected 8, got " + std::to_string(raw.bit_depth));
  if (raw.color_type != PNG_COLOR_TYPE_RGB)
    throw FormatError(kModule, "load_image", "color_type: expected RGB (2), got " + std::to_string(raw.color_type));
  return Image(raw.width, raw.height, raw.pixels);
}

void save_image(const Image& image, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".ppm") {
    write_ppm(image, path);
    return;
  }
  if (ext != ".png")
    throw Error(ErrorKind::input, kModule, "save_image", "unsupported extension '" + ext + "'");
  const std::vector<std::uint8_t> pixels(image.samples().begin(), image.samples().end());
  write_png(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, pixels,
            3 * static_cast<std::size_t>(image.width()), "save_image");
}

LabelMap load_label_map(const std::filesystem::path& path) {
  return LabelMap::from_grid(read_grid_any(path, "load_label_map"));
}

void save_label_map(const LabelMap& map, const std::filesystem::path& path) {
  write_grid_any(map.grid(), path, "save_label_map");
}

LabelGrid read_label_grid(const std::filesystem::path& path) {
  return read_grid_any(path, "read_label_grid");
}

void write_label_grid(const LabelGrid& grid, const std::filesystem::path& path) {
  write_grid_any(grid, path, "write_label_grid");
}

}  // namespace mhc
