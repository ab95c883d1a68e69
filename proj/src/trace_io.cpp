#include "epr/trace_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

#include "epr/errors.hpp"

namespace epr {

namespace {

constexpr char kMagic[4] = {'E', 'P', 'R', 'T'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::filesystem::path& path, std::ifstream& in, std::uintmax_t file_size)
      : path_(path), in_(in), remaining_(file_size) {}

  void read(void* dst, std::size_t n) {
    if (n > remaining_ || !in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n))) {
      throw FormatError("truncated trace file " + path_.string());
    }
    remaining_ -= n;
  }

  std::uint16_t u16() {
    unsigned char b[2];
    read(b, 2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  std::uint64_t u64() {
    unsigned char b[8];
    read(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::uintmax_t remaining() const { return remaining_; }

 private:
  const std::filesystem::path& path_;
  std::ifstream& in_;
  std::uintmax_t remaining_;
};

}  // namespace

void write_trace(const std::filesystem::path& path, const QuadratureTraceSet& trace) {
  if (trace.ch1.size() != trace.ch2.size()) {
    throw ValidationError("trace channels must have equal length");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");

  std::string header;
  header.append(kMagic, 4);
  put_u16(header, kTraceFormatVersion);
  put_u16(header, 2);  // channel count
  put_f64(header, trace.sample_rate_hz);
  put_u64(header, trace.ch1.size());
  put_f64(header, trace.lo_angles.theta1);
  put_f64(header, trace.lo_angles.theta2);
  put_f64(header, trace.cal_var1);
  put_f64(header, trace.cal_var2);
  if (trace.metadata.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("trace metadata too large");
  }
  put_u32(header, static_cast<std::uint32_t>(trace.metadata.size()));
  header += trace.metadata;
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  // interleave in buffered blocks
  constexpr std::size_t kBlock = 1 << 16;
  std::string buf;
  buf.reserve(kBlock * 16);
  for (std::size_t i = 0; i < trace.ch1.size(); ++i) {
    put_f64(buf, trace.ch1[i]);
    put_f64(buf, trace.ch2[i]);
    if (buf.size() >= kBlock * 16) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  if (!buf.empty()) out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

QuadratureTraceSet read_trace(const std::filesystem::path& path) {
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  Reader r(path, in, file_size);
  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError(path.string() + " is not a trace file (bad magic)");
  }
  const auto version = r.u16();
  if (version != kTraceFormatVersion) {
    throw FormatError("unsupported trace format version " + std::to_string(version) +
                      " in " + path.string());
  }
  const auto channels = r.u16();
  if (channels != 2) {
    throw FormatError("expected 2 channels, got " + std::to_string(channels) + " in " +
                      path.string());
  }

  QuadratureTraceSet trace;
  trace.sample_rate_hz = r.f64();
  const std::uint64_t count = r.u64();
  const double theta1 = r.f64();
  const double theta2 = r.f64();
  trace.lo_angles = QuadratureAngles(theta1, theta2);
  trace.cal_var1 = r.f64();
  trace.cal_var2 = r.f64();
  const auto meta_len = r.u32();
  trace.metadata.resize(meta_len);
  if (meta_len > 0) r.read(trace.metadata.data(), meta_len);

  const std::uint64_t payload = r.remaining();
  const std::uint64_t expected = count * channels * sizeof(double);
  if (payload != expected) {
    throw FormatError("trace payload length mismatch in " + path.string() + ": expected " +
                      std::to_string(expected) + " bytes, found " + std::to_string(payload));
  }

  trace.ch1.resize(count);
  trace.ch2.resize(count);
  constexpr std::size_t kBlock = 1 << 16;
  std::vector<std::uint64_t> buf(2 * kBlock);
  std::uint64_t done = 0;
  while (done < count) {
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kBlock, count - done));
    r.read(buf.data(), n * 2 * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) {
      trace.ch1[done + i] = std::bit_cast<double>(buf[2 * i]);
      trace.ch2[done + i] = std::bit_cast<double>(buf[2 * i + 1]);
    }
    done += n;
  }
  return trace;
}

}  // namespace epr
