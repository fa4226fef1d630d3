#include "cdsa/image_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cdsa/errors.hpp"

namespace cdsa {

namespace {

constexpr char kF32Magic[8] = {'C', 'D', 'S', 'A', 'F', '3', '2', '\0'};
constexpr char kT4Magic[8] = {'C', 'D', 'S', 'A', 'T', '4', '\0', '\0'};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path + ": cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path + ": write failed");
}

[[noreturn]] void parse_error(const std::string& path, std::size_t offset,
                              const std::string& what) {
  throw DataError(path + ": " + what + " at byte " + std::to_string(offset));
}

struct PgmHeader {
  Index width = 0, height = 0;
  long maxval = 0;
  std::size_t data_offset = 0;
};

PgmHeader parse_pgm_header(const std::string& bytes, const std::string& path) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < bytes.size()) {
      const char ch = bytes[pos];
      if (ch == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) -> long {
    skip_ws();
    const std::size_t start = pos;
    long v = 0;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
    }
    if (pos == start) parse_error(path, pos, std::string("expected ") + what);
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    parse_error(path, 0, "expected 'P5' magic");
  pos = 2;
  PgmHeader h;
  h.width = static_cast<Index>(read_int("width"));
  h.height = static_cast<Index>(read_int("height"));
  h.maxval = read_int("maxval");
  if (h.width <= 0 || h.height <= 0) parse_error(path, pos, "non-positive dimensions");
  if (h.maxval <= 0 || h.maxval > 65535) parse_error(path, pos, "maxval out of range");
  // exactly one whitespace byte separates the header from the samples
  if (pos >= bytes.size()) parse_error(path, pos, "missing header terminator");
  const char sep = bytes[pos];
  if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
    parse_error(path, pos, "missing whitespace after maxval");
  ++pos;
  h.data_offset = pos;
  return h;
}

std::uint32_t read_u32le(const std::string& bytes, std::size_t pos) {
  std::uint32_t v = 0;
  std::memcpy(&v, bytes.data() + pos, 4);
  return v;  // little-endian host assumed (x86/arm)
}

void append_u32le(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

Image load_pgm(const std::string& path, const std::string& bytes, bool sixteen_bit) {
  const PgmHeader h = parse_pgm_header(bytes, path);
  const bool file_16 = h.maxval > 255;
  if (file_16 != sixteen_bit)
    parse_error(path, h.data_offset,
                sixteen_bit ? "declared pgm16 but maxval fits 8 bits"
                            : "declared pgm8 but maxval needs 16 bits");
  const std::size_t n = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height);
  const std::size_t need = n * (sixteen_bit ? 2 : 1);
  if (bytes.size() - h.data_offset < need)
    parse_error(path, bytes.size(), "truncated pixel data");

  Image img(h.height, h.width);
  const unsigned char* p =
      reinterpret_cast<const unsigned char*>(bytes.data()) + h.data_offset;
  const double scale = sixteen_bit ? 1.0 / 65535.0 : 1.0 / 255.0;
  double* dst = img.data();
  if (sixteen_bit) {
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned hi = p[2 * i], lo = p[2 * i + 1];  // big-endian samples
      dst[i] = static_cast<double>((hi << 8) | lo) * scale;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<double>(p[i]) * scale;
  }
  return img;
}

Image load_f32(const std::string& path, const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kF32Magic, 8) != 0)
    parse_error(path, 0, "expected 'CDSAF32' magic");
  const std::uint32_t height = read_u32le(bytes, 8);
  const std::uint32_t width = read_u32le(bytes, 12);
  if (height == 0 || width == 0) parse_error(path, 8, "zero dimension");
  const std::size_t n = static_cast<std::size_t>(height) * width;
  if (bytes.size() - 16 < n * 4) parse_error(path, bytes.size(), "truncated float payload");

  Image img(static_cast<Index>(height), static_cast<Index>(width));
  const char* src = bytes.data() + 16;
  double* dst = img.data();
  for (std::size_t i = 0; i < n; ++i) {
    float f;
    std::memcpy(&f, src + 4 * i, 4);
    if (!std::isfinite(f))
      throw DataError(path + ": non-finite value at pixel " + std::to_string(i));
    dst[i] = static_cast<double>(f);
  }
  return img;
}

}  // namespace

Image load_image(const std::string& path, ImageFormat format) {
  const std::string bytes = read_file(path);
  switch (format) {
    case ImageFormat::pgm8:
      return load_pgm(path, bytes, false);
    case ImageFormat::pgm16:
      return load_pgm(path, bytes, true);
    case ImageFormat::f32raw:
      return load_f32(path, bytes);
  }
  throw ArgumentError("load_image: unknown format");
}

Image load_image(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kF32Magic, 8) == 0)
    return load_f32(path, bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') {
    const PgmHeader h = parse_pgm_header(bytes, path);
    return load_pgm(path, bytes, h.maxval > 255);
  }
  parse_error(path, 0, "unrecognized image format");
}

void save_image(const std::string& path, const Image& img, ImageFormat format) {
  if (img.size() == 0) throw ArgumentError("save_image: empty image");
  const std::size_t n = static_cast<std::size_t>(img.size());
  std::string out;
  switch (format) {
    case ImageFormat::pgm8:
    case ImageFormat::pgm16: {
      const bool sixteen = format == ImageFormat::pgm16;
      const long maxval = sixteen ? 65535 : 255;
      std::ostringstream head;
      head << "P5\n" << img.cols() << ' ' << img.rows() << '\n' << maxval << '\n';
      out = head.str();
      out.reserve(out.size() + n * (sixteen ? 2 : 1));
      const double* src = img.data();
      for (std::size_t i = 0; i < n; ++i) {
        const double v = std::min(1.0, std::max(0.0, src[i]));
        const long code = std::lround(v * static_cast<double>(maxval));
        if (sixteen) {
          out.push_back(static_cast<char>((code >> 8) & 0xff));
          out.push_back(static_cast<char>(code & 0xff));
        } else {
          out.push_back(static_cast<char>(code & 0xff));
        }
      }
      break;
    }
    case ImageFormat::f32raw: {
      out.assign(kF32Magic, 8);
      append_u32le(out, static_cast<std::uint32_t>(img.rows()));
      append_u32le(out, static_cast<std::uint32_t>(img.cols()));
      out.reserve(16 + n * 4);
      const double* src = img.data();
      for (std::size_t i = 0; i < n; ++i) {
        const float f = static_cast<float>(src[i]);
        char buf[4];
        std::memcpy(buf, &f, 4);
        out.append(buf, 4);
      }
      break;
    }
  }
  write_file(path, out);
}

ImageFormat format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".pgm") return ImageFormat::pgm16;
  if (ext == ".f32") return ImageFormat::f32raw;
  throw ArgumentError(path + ": cannot infer format (use .pgm or .f32)");
}

Mask load_mask(const std::string& path) {
  const Image img = load_image(path);
  return img > 0.5;
}

void save_mask(const std::string& path, const Mask& mask) {
  save_image(path, to_image(mask), ImageFormat::pgm8);
}

Tensor4 load_tensor4(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kT4Magic, 8) != 0)
    parse_error(path, 0, "expected 'CDSAT4' magic");
  const std::uint32_t dims[4] = {read_u32le(bytes, 8), read_u32le(bytes, 12),
                                 read_u32le(bytes, 16), read_u32le(bytes, 20)};
  for (int i = 0; i < 4; ++i)
    if (dims[i] == 0) parse_error(path, 8 + 4 * static_cast<std::size_t>(i), "zero dimension");
  const std::size_t n =
      std::size_t{dims[0]} * dims[1] * dims[2] * dims[3];
  if (bytes.size() - 24 < n * 4) parse_error(path, bytes.size(), "truncated float payload");

  Tensor4 t(dims[0], dims[1], dims[2], dims[3]);
  const char* src = bytes.data() + 24;
  for (std::size_t i = 0; i < n; ++i) {
    float f;
    std::memcpy(&f, src + 4 * i, 4);
    if (!std::isfinite(f))
      throw DataError(path + ": non-finite value at element " + std::to_string(i));
    t.data[static_cast<Index>(i)] = static_cast<double>(f);
  }
  return t;
}

void save_tensor4(const std::string& path, const Tensor4& t) {
  if (t.size() == 0) throw ArgumentError("save_tensor4: empty tensor");
  std::string out(kT4Magic, 8);
  append_u32le(out, static_cast<std::uint32_t>(t.n));
  append_u32le(out, static_cast<std::uint32_t>(t.c));
  append_u32le(out, static_cast<std::uint32_t>(t.h));
  append_u32le(out, static_cast<std::uint32_t>(t.w));
  const std::size_t n = static_cast<std::size_t>(t.size());
  out.reserve(24 + n * 4);
  for (std::size_t i = 0; i < n; ++i) {
    const float f = static_cast<float>(t.data[static_cast<Index>(i)]);
    char buf[4];
    std::memcpy(buf, &f, 4);
    out.append(buf, 4);
  }
  write_file(path, out);
}

void save_key_values(const std::string& path,
                     const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  write_file(path, out);
}

}  // namespace cdsa
