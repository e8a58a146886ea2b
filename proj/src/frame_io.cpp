#include "sqzcam/frame_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <ostream>
#include <string>

#include "sqzcam/errors.hpp"

namespace sqzcam {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'S', 'Q', 'Z', 'F', 'R', 'A', 'M', 'E'};

class Writer {
 public:
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : in_(b) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw CorruptFileError(std::string("frame file truncated while reading ") + what);
    }
  }
  std::span<const std::uint8_t> bytes(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32(const char* what) {
    auto s = bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{s[i]} << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto s = bytes(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{s[i]} << (8 * i);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::uint8_t> encode_batch(const FrameBatch& b) {
  Writer w;
  w.bytes(kMagic);
  w.u32(kFrameFormatVersion);
  w.f64(b.params().n_alpha);
  w.f64(b.params().n_s);
  w.f64(b.params().phi1);
  w.u32(b.geometry().rows());
  w.u32(b.geometry().cols());
  for (double x : b.geometry().weights()) w.f64(x);
  w.u64(b.seed().seed);
  w.u32(b.seed().stream);
  w.u64(b.n_frames());
  auto& buf = w.buffer();
  buf.reserve(buf.size() + 4 * b.counts().size() + 8);
  for (std::uint32_t c : b.counts()) w.u32(c);
  w.u64(fnv1a64(buf));
  return std::move(buf);
}

FrameBatch decode_batch(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.bytes(kMagic.size(), "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw CorruptFileError("not a frame file (bad magic)");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kFrameFormatVersion) {
    throw FormatVersionError("unsupported frame format version " + std::to_string(version) +
                             " (expected " + std::to_string(kFrameFormatVersion) + ")");
  }
  StateParams p;
  p.n_alpha = r.f64("params");
  p.n_s = r.f64("params");
  p.phi1 = r.f64("params");
  const std::uint32_t rows = r.u32("geometry");
  const std::uint32_t cols = r.u32("geometry");
  const std::uint64_t pixels = std::uint64_t{rows} * cols;
  if (pixels == 0 || pixels > r.remaining() / 8) throw CorruptFileError("frame file truncated in geometry");
  std::vector<double> weights(pixels);
  for (auto& x : weights) x = r.f64("weights");
  SeedRecord seed;
  seed.seed = r.u64("seed");
  seed.stream = r.u32("seed");
  const std::uint64_t n_frames = r.u64("frame count");
  if (n_frames == 0 || n_frames > r.remaining() / (4 * pixels)) {
    throw CorruptFileError("frame file truncated in counts");
  }
  std::vector<std::uint32_t> counts(n_frames * pixels);
  for (auto& c : counts) c = r.u32("counts");
  const std::size_t payload_end = r.position();
  const std::uint64_t stored = r.u64("checksum");
  if (r.remaining() != 0) throw CorruptFileError("trailing bytes after checksum");
  if (stored != fnv1a64(bytes.first(payload_end))) throw CorruptFileError("checksum mismatch");

  try {
    return FrameBatch(p, SensorGeometry(rows, cols, std::move(weights)), seed, n_frames, std::move(counts));
  } catch (const DomainError& e) {
    throw CorruptFileError(std::string("invalid frame file contents: ") + e.what());
  }
}

std::uint64_t batch_checksum(const FrameBatch& b) {
  const auto bytes = encode_batch(b);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[bytes.size() - 8 + i]} << (8 * i);
  return v;
}

void write_batch(const FrameBatch& b, const std::filesystem::path& path) {
  const auto bytes = encode_batch(b);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for " + path.string());
}

FrameBatch read_batch(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (is.bad()) throw IoError("read failed for " + path.string());
  return decode_batch(bytes);
}

void write_batch_csv(const FrameBatch& b, std::ostream& os) {
  os << "frame,pixel,count\n";
  const std::size_t pixels = b.pixel_count();
  for (std::size_t f = 0; f < b.n_frames(); ++f) {
    const auto fr = b.frame(f);
    for (std::size_t i = 0; i < pixels; ++i) os << f << ',' << i << ',' << fr[i] << '\n';
  }
}

}  // namespace sqzcam
