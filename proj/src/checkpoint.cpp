#include "quadrl/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "quadrl/errors.hpp"

namespace quadrl {

namespace {

// Layout (little-endian hosts):
//   8 bytes magic, u64 meta length, meta JSON bytes,
//   actor tensors, critic tensors, 4 log_std doubles,
//   u8 optimizer flag, then (i64 step, m tensors, v tensors) when set.
// Each tensor block: u32 rows, u32 cols, rows*cols doubles column-major.
constexpr char kMagic[8] = {'Q', 'R', 'L', 'C', 'K', 'P', 'T', '1'};

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& out, T value) {
  write_bytes(out, &value, sizeof(T));
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  write_bytes(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  write_pod<std::uint32_t>(out, 1);
  write_bytes(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void write_layers(std::ostream& out, const std::vector<LayerParams>& layers) {
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto& layer : layers) {
    write_matrix(out, layer.weight);
    write_vector(out, layer.bias);
  }
}

void read_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (!in) throw ConfigError("checkpoint: truncated file");
}

template <typename T>
T read_pod(std::istream& in) {
  T value;
  read_bytes(in, &value, sizeof(T));
  return value;
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  const auto rows = read_pod<std::uint32_t>(in);
  const auto cols = read_pod<std::uint32_t>(in);
  if (rows > 1u << 20 || cols > 1u << 20) throw ConfigError("checkpoint: implausible tensor size");
  Eigen::MatrixXd m(rows, cols);
  read_bytes(in, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return m;
}

Eigen::VectorXd read_bias(std::istream& in) {
  Eigen::MatrixXd m = read_matrix(in);
  if (m.cols() != 1) throw ConfigError("checkpoint: bias block is not a vector");
  return m.col(0);
}

std::vector<LayerParams> read_layers(std::istream& in) {
  const auto n = read_pod<std::uint32_t>(in);
  if (n > 64) throw ConfigError("checkpoint: implausible layer count");
  std::vector<LayerParams> layers(n);
  for (auto& layer : layers) {
    layer.weight = read_matrix(in);
    layer.bias = read_bias(in);
    if (layer.bias.size() != layer.weight.rows()) {
      throw ConfigError("checkpoint: bias length does not match layer width");
    }
  }
  return layers;
}

void check_chain(const std::vector<LayerParams>& layers, int input_dim, int output_dim,
                 const char* net) {
  if (layers.empty()) throw ConfigError(std::string("checkpoint: empty network: ") + net);
  if (layers.front().weight.cols() != input_dim || layers.back().weight.rows() != output_dim) {
    throw ConfigError(std::string("checkpoint: unexpected ") + net + " dimensions");
  }
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    if (layers[l + 1].weight.cols() != layers[l].weight.rows()) {
      throw ConfigError(std::string("checkpoint: inconsistent ") + net + " layer chain");
    }
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp.string() + " for writing");
    write_bytes(out, kMagic, sizeof(kMagic));
    write_pod<std::uint64_t>(out, checkpoint.meta_json.size());
    write_bytes(out, checkpoint.meta_json.data(), checkpoint.meta_json.size());
    write_layers(out, checkpoint.policy.actor.layers);
    write_layers(out, checkpoint.policy.critic.layers);
    write_bytes(out, checkpoint.policy.log_std.data(), sizeof(double) * 4);
    write_pod<std::uint8_t>(out, checkpoint.has_optimizer ? 1 : 0);
    if (checkpoint.has_optimizer) {
      write_pod<std::int64_t>(out, checkpoint.adam_step);
      for (const auto* grads : {&checkpoint.adam_m, &checkpoint.adam_v}) {
        write_layers(out, grads->actor);
        write_layers(out, grads->critic);
        Eigen::VectorXd ls = grads->log_std;
        write_bytes(out, ls.data(), sizeof(double) * 4);
      }
    }
    out.flush();
    if (!out) throw std::runtime_error("checkpoint: write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path.string());
  char magic[8];
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("checkpoint: bad magic in " + path.string());
  }
  Checkpoint ckpt;
  const auto meta_len = read_pod<std::uint64_t>(in);
  if (meta_len > 1u << 26) throw ConfigError("checkpoint: implausible metadata size");
  ckpt.meta_json.resize(meta_len);
  if (meta_len > 0) read_bytes(in, ckpt.meta_json.data(), meta_len);

  ckpt.policy.actor.layers = read_layers(in);
  ckpt.policy.critic.layers = read_layers(in);
  check_chain(ckpt.policy.actor.layers, kObservationDim, kActionDim, "actor");
  check_chain(ckpt.policy.critic.layers, kObservationDim, 1, "critic");
  read_bytes(in, ckpt.policy.log_std.data(), sizeof(double) * 4);

  const auto flag = read_pod<std::uint8_t>(in);
  if (flag > 1) throw ConfigError("checkpoint: bad optimizer flag");
  ckpt.has_optimizer = flag == 1;
  if (ckpt.has_optimizer) {
    ckpt.adam_step = read_pod<std::int64_t>(in);
    for (auto* grads : {&ckpt.adam_m, &ckpt.adam_v}) {
      grads->actor = read_layers(in);
      grads->critic = read_layers(in);
      Eigen::VectorXd ls(4);
      read_bytes(in, ls.data(), sizeof(double) * 4);
      grads->log_std = ls;
    }
  }
  return ckpt;
}

}  // namespace quadrl
