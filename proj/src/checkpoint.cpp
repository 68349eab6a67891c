#include "gvae/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "gvae/error.hpp"
#include "gvae/io_util.hpp"

namespace gvae {

namespace {

void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f64(std::string& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  Reader(const std::string& data, std::string path)
      : data_(data), path_(std::move(path)) {}

  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64() {
    require(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  void expect_magic() {
    require(4);
    if (data_.compare(pos_, 4, "GVAE") != 0) {
      throw DataError("'" + path_ + "' is not a checkpoint (bad magic)");
    }
    pos_ += 4;
  }

  bool exhausted() const { return pos_ == data_.size(); }

 private:
  void require(std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw DataError("'" + path_ + "' is truncated");
    }
  }

  const std::string& data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".json");
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const nlohmann::json& sidecar) {
  std::string out;
  out.reserve(64);
  out += "GVAE";
  append_u32(out, kCheckpointVersion);
  append_u32(out, static_cast<std::uint32_t>(params.dims.nodes));
  append_u32(out, static_cast<std::uint32_t>(params.dims.features));
  append_u32(out, static_cast<std::uint32_t>(params.dims.hidden));
  append_u32(out, static_cast<std::uint32_t>(params.dims.latent));
  for_each_tensor(params, [&](const std::string&, const DenseMatrix& t) {
    for (double v : t.values()) append_f64(out, v);
  });
  atomic_write_file(path, out);

  nlohmann::json side = sidecar;
  side["format_version"] = kCheckpointVersion;
  side["depth"] = params.dims.depth;
  atomic_write_file(sidecar_path(path), side.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Checkpoint ckpt;
  const std::string side_raw = read_file(sidecar_path(path));
  ckpt.sidecar = nlohmann::json::parse(side_raw, nullptr, /*allow_exceptions=*/false);
  if (ckpt.sidecar.is_discarded()) {
    throw DataError("'" + sidecar_path(path).string() + "' is not valid JSON");
  }
  if (!ckpt.sidecar.contains("depth")) {
    throw DataError("'" + sidecar_path(path).string() + "' is missing the depth field");
  }

  const std::string raw = read_file(path);
  Reader reader(raw, path.string());
  reader.expect_magic();
  const std::uint32_t version = reader.u32();
  if (version != kCheckpointVersion) {
    throw DataError("'" + path.string() + "': unsupported checkpoint version " +
                    std::to_string(version));
  }
  ModelDims dims;
  dims.nodes = reader.u32();
  dims.features = reader.u32();
  dims.hidden = reader.u32();
  dims.latent = reader.u32();
  dims.depth = ckpt.sidecar["depth"].get<int>();

  ckpt.params = init_params(dims, 0);
  for_each_tensor(ckpt.params, [&](const std::string&, DenseMatrix& t) {
    for (double& v : t.values()) v = reader.f64();
  });
  if (!reader.exhausted()) {
    throw DataError("'" + path.string() + "' has trailing bytes");
  }
  return ckpt;
}

}  // namespace gvae
