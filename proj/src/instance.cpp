#include "locamp/instance.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "locamp/error.hpp"

namespace locamp {

double ModelInstance::noise_scale() const { return std::sqrt(delta / alpha); }

Eigen::Index measurement_count(Eigen::Index N, double alpha) {
  return static_cast<Eigen::Index>(std::llround(alpha * static_cast<double>(N)));
}

ModelInstance generate_instance(const Prior& prior, Eigen::Index N, double alpha, double delta,
                                Rng& signal_rng, Rng& noise_rng) {
  require(N >= 1, "generate_instance: N must be positive");
  require(std::isfinite(alpha) && alpha > 0.0, "generate_instance: alpha must be positive");
  require(std::isfinite(delta) && delta >= 0.0, "generate_instance: delta must be non-negative");
  const Eigen::Index M = measurement_count(N, alpha);
  require(M >= 1, "generate_instance: alpha * N rounds to zero measurements");

  Eigen::VectorXd theta = sample_prior(prior, N, signal_rng);
  Eigen::MatrixXd phi(M, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(M));
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = 0; i < M; ++i) phi(i, j) = scale * noise_rng.normal();
  }
  Eigen::VectorXd w = noise_rng.normal_vector(M);
  return make_instance(prior, std::move(phi), std::move(theta), std::move(w), delta);
}

ModelInstance generate_instance(const Prior& prior, Eigen::Index N, double alpha, double delta,
                                Rng& rng) {
  return generate_instance(prior, N, alpha, delta, rng, rng);
}

ModelInstance make_instance(const Prior& prior, Eigen::MatrixXd phi, Eigen::VectorXd theta,
                            Eigen::VectorXd w, double delta) {
  require(phi.rows() >= 1 && phi.cols() >= 1, "make_instance: empty design matrix");
  require(theta.size() == phi.cols(), "make_instance: theta length must equal phi columns");
  require(w.size() == phi.rows(), "make_instance: w length must equal phi rows");
  require(std::isfinite(delta) && delta >= 0.0, "make_instance: delta must be non-negative");
  ModelInstance inst{prior};
  inst.N = phi.cols();
  inst.M = phi.rows();
  inst.alpha = static_cast<double>(inst.M) / static_cast<double>(inst.N);
  inst.delta = delta;
  inst.phi = std::move(phi);
  inst.theta_true = std::move(theta);
  inst.w = std::move(w);
  inst.y = inst.phi * inst.theta_true + inst.noise_scale() * inst.w;
  return inst;
}

ModelInstance make_observed_instance(const Prior& prior, Eigen::MatrixXd phi, Eigen::VectorXd y,
                                     double delta) {
  require(y.size() == phi.rows(), "make_observed_instance: y length must equal phi rows");
  require(std::isfinite(delta) && delta >= 0.0, "make_observed_instance: bad delta");
  ModelInstance inst{prior};
  inst.N = phi.cols();
  inst.M = phi.rows();
  inst.alpha = static_cast<double>(inst.M) / static_cast<double>(inst.N);
  inst.delta = delta;
  inst.phi = std::move(phi);
  inst.y = std::move(y);
  return inst;
}

namespace {

constexpr char kMagic[8] = {'L', 'O', 'C', 'A', 'M', 'P', '0', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw InvalidArgument("instance file truncated");
  return v;
}
void put_block(std::ostream& os, const double* data, Eigen::Index n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}
void get_block(std::istream& is, double* data, Eigen::Index n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw InvalidArgument("instance file truncated");
}

void write_vector_csv(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  std::ofstream os(path);
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << v[i] << '\n';
}

}  // namespace

void write_instance_binary(const ModelInstance& inst, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path.string());
  os.write(kMagic, sizeof(kMagic));
  const std::string prior = inst.prior.to_json().dump();
  put<std::uint64_t>(os, prior.size());
  os.write(prior.data(), static_cast<std::streamsize>(prior.size()));
  put<std::int64_t>(os, inst.N);
  put<std::int64_t>(os, inst.M);
  put<double>(os, inst.delta);
  put<std::uint8_t>(os, inst.theta_true.size() == inst.N ? 1 : 0);
  put_block(os, inst.phi.data(), inst.phi.size());
  if (inst.theta_true.size() == inst.N) {
    put_block(os, inst.theta_true.data(), inst.N);
    put_block(os, inst.w.data(), inst.M);
  }
  put_block(os, inst.y.data(), inst.M);
}

ModelInstance read_instance_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InvalidArgument(path.string() + " is not an instance file");
  }
  std::string prior_json(get<std::uint64_t>(is), '\0');
  is.read(prior_json.data(), static_cast<std::streamsize>(prior_json.size()));
  const Prior prior = Prior::from_json(nlohmann::json::parse(prior_json));
  const auto N = get<std::int64_t>(is);
  const auto M = get<std::int64_t>(is);
  const double delta = get<double>(is);
  const bool has_truth = get<std::uint8_t>(is) != 0;
  Eigen::MatrixXd phi(M, N);
  get_block(is, phi.data(), phi.size());
  ModelInstance inst{prior};
  if (has_truth) {
    Eigen::VectorXd theta(N), w(M);
    get_block(is, theta.data(), N);
    get_block(is, w.data(), M);
    inst = make_instance(prior, std::move(phi), std::move(theta), std::move(w), delta);
    get_block(is, inst.y.data(), M);  // stored y is authoritative
  } else {
    Eigen::VectorXd y(M);
    get_block(is, y.data(), M);
    inst = make_observed_instance(prior, std::move(phi), std::move(y), delta);
  }
  return inst;
}

void write_instance_csv(const ModelInstance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    nlohmann::json meta = {{"N", inst.N},         {"M", inst.M},
                           {"alpha", inst.alpha}, {"delta", inst.delta},
                           {"prior", inst.prior.to_json()}};
    std::ofstream(dir / "meta.json") << meta.dump(2) << '\n';
  }
  {
    std::ofstream os(dir / "phi.csv");
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < inst.M; ++i) {
      for (Eigen::Index j = 0; j < inst.N; ++j) os << (j ? "," : "") << inst.phi(i, j);
      os << '\n';
    }
  }
  if (inst.theta_true.size() == inst.N) {
    write_vector_csv(dir / "theta.csv", inst.theta_true);
    write_vector_csv(dir / "w.csv", inst.w);
  }
  write_vector_csv(dir / "y.csv", inst.y);
}

}  // namespace locamp
