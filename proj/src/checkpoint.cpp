#include "ggl/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ggl/errors.hpp"

namespace ggl {

namespace {

constexpr uint32_t kVersion = 1;

template <class T>
void put(std::string& out, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > s_.size()) throw ParameterError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_parameters(const std::vector<const Parameter*>& params) {
  std::string out = "GGL1";
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put<uint32_t>(out, static_cast<uint32_t>(p->name.size()));
    out += p->name;
    put<uint32_t>(out, 2);
    put<uint64_t>(out, static_cast<uint64_t>(p->value.rows()));
    put<uint64_t>(out, static_cast<uint64_t>(p->value.cols()));
    for (Eigen::Index k = 0; k < p->value.size(); ++k) put<double>(out, p->value.data()[k]);
    std::string bits((p->value.size() + 7) / 8, '\0');
    for (Eigen::Index k = 0; k < p->mask.size(); ++k)
      if (p->mask.data()[k] != 0.0) bits[k / 8] = static_cast<char>(bits[k / 8] | (1 << (k % 8)));
    out += bits;
  }
  return out;
}

std::vector<Parameter> deserialize_parameters(const std::string& blob) {
  Reader r(blob);
  if (r.bytes(4) != "GGL1") throw ParameterError("checkpoint: bad magic");
  uint32_t version = r.get<uint32_t>();
  if (version != kVersion) throw ParameterError("checkpoint: unsupported version " + std::to_string(version));
  uint32_t count = r.get<uint32_t>();
  std::vector<Parameter> out;
  out.reserve(count);
  for (uint32_t c = 0; c < count; ++c) {
    std::string name = r.bytes(r.get<uint32_t>());
    uint32_t rank = r.get<uint32_t>();
    if (rank != 2) throw ParameterError("checkpoint: parameter '" + name + "' has rank " + std::to_string(rank));
    auto rows = static_cast<Eigen::Index>(r.get<uint64_t>());
    auto cols = static_cast<Eigen::Index>(r.get<uint64_t>());
    Mat value(rows, cols), mask(rows, cols);
    for (Eigen::Index k = 0; k < value.size(); ++k) value.data()[k] = r.get<double>();
    std::string bits = r.bytes((value.size() + 7) / 8);
    for (Eigen::Index k = 0; k < mask.size(); ++k)
      mask.data()[k] = (static_cast<unsigned char>(bits[k / 8]) >> (k % 8)) & 1u ? 1.0 : 0.0;
    out.emplace_back(std::move(name), std::move(value), std::move(mask));
  }
  if (!r.done()) throw ParameterError("checkpoint: trailing bytes");
  return out;
}

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open '" + path + "' for writing");
  std::string blob = serialize_parameters(params);
  f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
}

std::vector<Parameter> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParameterError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_parameters(ss.str());
}

std::string checkpoint_name(int player, int time_index, const std::string& param) {
  return "player" + std::to_string(player) + "/t" + std::to_string(time_index) + "/" + param;
}

}  // namespace ggl
