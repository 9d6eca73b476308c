#include "pinn/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace pinn {

Activation activation_from_name(const std::string& name) {
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  if (name == "gelu") return Activation::Gelu;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::Gelu: return "gelu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

size_t MlpSpec::param_count() const {
  size_t n = 0;
  for (const auto& l : layers)
    n += static_cast<size_t>(l.in) * static_cast<size_t>(l.out) +
         static_cast<size_t>(l.out);
  return n;
}

bool MlpSpec::chains() const {
  if (layers.empty()) return false;
  for (size_t i = 0; i + 1 < layers.size(); ++i)
    if (layers[i].out != layers[i + 1].in) return false;
  for (const auto& l : layers)
    if (l.in < 1 || l.out < 1) return false;
  return layers.back().out >= 1;
}

MlpSpec MlpSpec::dense(const std::vector<int>& dims, Activation hidden) {
  if (dims.size() < 2) throw std::invalid_argument("dense: need at least two dims");
  MlpSpec s;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    bool last = i + 2 == dims.size();
    s.layers.push_back({dims[i], dims[i + 1], last ? Activation::Identity : hidden});
  }
  return s;
}

FlatParams init_params(const MlpSpec& spec, uint64_t seed) {
  if (!spec.chains()) throw std::invalid_argument("init_params: invalid layer spec");
  std::mt19937_64 eng(seed);
  // mt19937_64 output is standardized; the mapping to [0,1) below keeps the
  // draw bit-identical across platforms (std distributions are not).
  auto unit = [&eng]() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; };
  FlatParams p;
  p.reserve(spec.param_count());
  for (const auto& l : spec.layers) {
    double bound = std::sqrt(6.0 / (l.in + l.out));
    for (int i = 0; i < l.in * l.out; ++i) p.push_back((2.0 * unit() - 1.0) * bound);
    for (int i = 0; i < l.out; ++i) p.push_back(0.0);
  }
  return p;
}

std::vector<double> mlp_forward(const MlpSpec& spec, std::span<const double> params,
                                std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.input_dim())
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  if (params.size() < spec.param_count())
    throw std::invalid_argument("mlp_forward: parameter vector too short");
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  size_t off = 0;
  for (const auto& l : spec.layers) {
    next.assign(static_cast<size_t>(l.out), 0.0);
    for (int j = 0; j < l.out; ++j) {
      double z = 0.0;
      const double* w = params.data() + off + static_cast<size_t>(j) * l.in;
      for (int i = 0; i < l.in; ++i) z += w[i] * cur[static_cast<size_t>(i)];
      z += params[off + static_cast<size_t>(l.in) * l.out + static_cast<size_t>(j)];
      switch (l.act) {
        case Activation::Sigmoid: z = 1.0 / (1.0 + std::exp(-z)); break;
        case Activation::Tanh: z = std::tanh(z); break;
        case Activation::Gelu: z = z * 0.5 * (1.0 + std::erf(z * M_SQRT1_2)); break;
        case Activation::Identity: break;
      }
      next[static_cast<size_t>(j)] = z;
    }
    cur.swap(next);
    off += static_cast<size_t>(l.in) * l.out + static_cast<size_t>(l.out);
  }
  return cur;
}

namespace {
constexpr char kMagic[8] = {'P', 'I', 'N', 'N', 'F', 'P', '6', '4'};
}

void save_params_binary(const FlatParams& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  uint32_t version = 1;
  uint32_t n = static_cast<uint32_t>(p.size());
  f.write(kMagic, 8);
  f.write(reinterpret_cast<const char*>(&version), 4);
  f.write(reinterpret_cast<const char*>(&n), 4);
  f.write(reinterpret_cast<const char*>(p.data()),
          static_cast<std::streamsize>(p.size() * sizeof(double)));
}

FlatParams load_params_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  char magic[8];
  uint32_t version = 0, n = 0;
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&n), 4);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error(path + ": not a parameter blob");
  if (version != 1) throw std::runtime_error(path + ": unsupported version");
  FlatParams p(n);
  f.read(reinterpret_cast<char*>(p.data()),
         static_cast<std::streamsize>(n * sizeof(double)));
  if (!f) throw std::runtime_error(path + ": truncated parameter blob");
  return p;
}

void save_params_text(const FlatParams& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  char buf[40];
  for (double v : p) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    f << buf;
  }
}

FlatParams load_params_text(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  FlatParams p;
  double v;
  while (f >> v) p.push_back(v);
  return p;
}

}  // namespace pinn
