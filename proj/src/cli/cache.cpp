#include <openssl/evp.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "polaron/cli.hpp"

namespace polaron::cli {
namespace {

constexpr char kMagic[] = "polaron-pekar-snapshot-1\n";
constexpr std::size_t kDigest = 32;

std::string raw_sha256(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  return std::string(reinterpret_cast<char*>(md), len);
}

std::string hex(double v) {
  std::ostringstream s;
  s << std::hexfloat << v;
  return s.str();
}

std::string hex(const Vec3& v) { return hex(v[0]) + " " + hex(v[1]) + " " + hex(v[2]); }

std::string describe_grid(const Grid3D& g) {
  return std::to_string(g.points()) + " " + hex(g.extent()) + " " + to_string(g.boundary());
}

template <class T>
void put(std::string& out, const T& v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& s) : s_(s) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > s_.size()) throw std::runtime_error("truncated entry");
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string bytes(std::size_t n) {
    if (pos_ + n > s_.size()) throw std::runtime_error("truncated entry");
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == s_.size(); }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string sha256_hex(const std::string& data) {
  const std::string d = raw_sha256(data);
  std::ostringstream s;
  for (unsigned char c : d) s << std::hex << std::setw(2) << std::setfill('0') << int(c);
  return s.str();
}

std::string describe_fields(const PotentialPair& pair) {
  std::string out = "A:";
  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ZeroVectorPotential>) {
          out += "zero";
        } else if constexpr (std::is_same_v<T, ConstantMagneticField>) {
          out += "constant-field " + hex(a.field);
        } else {
          std::string data;
          for (const auto& c : a.components) data.append(reinterpret_cast<const char*>(c.data()), c.size() * sizeof(double));
          out += "sampled " + describe_grid(a.grid) + " " + sha256_hex(data);
        }
      },
      pair.vector_potential);
  out += " V:";
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ZeroScalarPotential>) {
          out += "zero";
        } else if constexpr (std::is_same_v<T, CoulombPotential>) {
          out += "coulomb " + hex(v.charge) + " " + hex(v.center);
        } else if constexpr (std::is_same_v<T, GaussianWell>) {
          out += "gaussian-well " + hex(v.depth) + " " + hex(v.width) + " " + hex(v.center);
        } else {
          const std::string data(reinterpret_cast<const char*>(v.values.data()),
                                 v.values.size() * sizeof(double));
          out += "sampled " + describe_grid(v.grid) + " " + sha256_hex(data);
        }
      },
      pair.scalar_potential);
  return out;
}

std::filesystem::path cache_root(const std::filesystem::path& out) {
  if (const char* env = std::getenv("POLARON_CACHE_DIR"); env && *env) return env;
  return out / "cache";
}

PekarCache::PekarCache(std::filesystem::path root) : root_(std::move(root)) {}

void PekarCache::warn(const std::string& w) {
  std::lock_guard lock(mu_);
  warnings_.push_back(w);
  std::cerr << "warning: " << w << "\n";
}

std::string PekarCache::key_text(const pekar::PekarProblem& problem,
                                 const pekar::MinimizeOptions& opts) {
  std::string k = "pekar-solution\nfields " + describe_fields(problem.pair);
  k += "\ncoupling " + hex(problem.alpha);
  k += "\ngrid " + describe_grid(problem.grid);
  k += "\ninteraction " +
       (problem.interaction ? problem.interaction->describe() : std::string("coulomb"));
  k += "\nsolver " + hex(opts.tolerance) + " " + std::to_string(opts.max_iterations) +
       " " + std::to_string(opts.restarts) + " " +
       std::to_string(static_cast<int>(opts.initializer)) + " " + std::to_string(opts.seed);
  if (opts.initializer == pekar::Initializer::kProvided) {
    if (!opts.start) throw ValidationError("provided initializer without a start state");
    const auto& v = opts.start->values;
    k += "\nstart " + describe_grid(opts.start->grid) + " " +
         sha256_hex(std::string(reinterpret_cast<const char*>(v.data()),
                                v.size() * sizeof(cplx)));
  }
  return k;
}

std::filesystem::path PekarCache::path_for(const std::string& key_text) const {
  return root_ / sha256_hex(key_text);
}

void PekarCache::store(const std::string& key_text, const pekar::PekarSolution& s) const {
  std::string payload;
  put(payload, static_cast<std::uint64_t>(key_text.size()));
  payload += key_text;
  for (double v : {s.energy, s.kinetic, s.potential, s.coulomb, s.alpha,
                   s.projected_residual, s.energy_error_estimate, s.multiplier})
    put(payload, v);
  put(payload, static_cast<std::int32_t>(s.iterations));
  put(payload, static_cast<std::int32_t>(s.converged));
  put(payload, static_cast<std::int32_t>(s.restart_index));
  put(payload, static_cast<std::uint64_t>(s.phi.values.size()));
  payload.append(reinterpret_cast<const char*>(s.phi.values.data()),
                 s.phi.values.size() * sizeof(cplx));

  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw IoError("cannot create cache directory " + root_.string());
  static std::atomic<int> counter{0};
  const auto final_path = path_for(key_text);
  const auto tmp = final_path.string() + ".tmp." + std::to_string(::getpid()) + "." +
                   std::to_string(counter++);
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << kMagic << payload << raw_sha256(payload);
    if (!f) throw IoError("cannot write cache entry " + tmp);
  }
  std::filesystem::rename(tmp, final_path, ec);
  if (ec) throw IoError("cannot replace cache entry " + final_path.string());
}

std::optional<pekar::PekarSolution> PekarCache::load(const std::string& key_text,
                                                     const Grid3D& grid) {
  const auto path = path_for(key_text);
  std::ifstream f(path, std::ios::binary);
  if (!f) return std::nullopt;
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string all = ss.str();
  f.close();
  try {
    const std::size_t magic = std::strlen(kMagic);
    if (all.size() < magic + kDigest || all.compare(0, magic, kMagic) != 0)
      throw std::runtime_error("bad header");
    const std::string payload = all.substr(magic, all.size() - magic - kDigest);
    if (raw_sha256(payload) != all.substr(all.size() - kDigest))
      throw std::runtime_error("checksum mismatch");
    Reader r(payload);
    const auto klen = r.get<std::uint64_t>();
    if (r.bytes(klen) != key_text) throw std::runtime_error("key mismatch");
    pekar::PekarSolution s(grid);
    s.energy = r.get<double>();
    s.kinetic = r.get<double>();
    s.potential = r.get<double>();
    s.coulomb = r.get<double>();
    s.alpha = r.get<double>();
    s.projected_residual = r.get<double>();
    s.energy_error_estimate = r.get<double>();
    s.multiplier = r.get<double>();
    s.iterations = r.get<std::int32_t>();
    s.converged = r.get<std::int32_t>() != 0;
    s.restart_index = r.get<std::int32_t>();
    const auto n = r.get<std::uint64_t>();
    if (n != grid.size()) throw std::runtime_error("grid size mismatch");
    const std::string values = r.bytes(n * sizeof(cplx));
    std::memcpy(s.phi.values.data(), values.data(), values.size());
    if (!r.done()) throw std::runtime_error("trailing bytes");
    return s;
  } catch (const std::exception& e) {
    warn("evicting corrupt cache entry " + path.string() + " (" + e.what() + ")");
    std::error_code ec;
    std::filesystem::remove(path, ec);
    return std::nullopt;
  }
}

PekarCache::Lookup PekarCache::get_or_solve(const pekar::PekarProblem& problem,
                                            const pekar::MinimizeOptions& opts) {
  const std::string key = key_text(problem, opts);
  if (auto s = load(key, problem.grid)) return {std::move(*s), true};
  pekar::PekarSolution s = pekar::minimize_pekar(problem, opts);
  {
    std::lock_guard lock(mu_);
    ++solves_;
  }
  store(key, s);
  return {std::move(s), false};
}

}  // namespace polaron::cli
