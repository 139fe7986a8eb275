#include "dfl/datagen.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfl/rng.hpp"

namespace dfl {
namespace {

constexpr const char* kMagic = "# dfl-dataset v1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw std::runtime_error("schema error: " + path + ": " + what);
}

void write_block(std::ostream& os, const char* name, const Matrix& m) {
  os << '[' << name << ' ' << m.rows() << ' ' << m.cols() << "]\n";
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) os << ' ';
      os << fmt(m(i, j));
    }
    os << '\n';
  }
}

class Reader {
 public:
  Reader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  std::string line() {
    std::string s;
    if (!std::getline(is_, s)) schema_error(path_, "unexpected end of file after line " + std::to_string(line_no_));
    ++line_no_;
    return s;
  }

  Matrix block(const char* name, Index rows, Index cols) {
    const std::string header = line();
    const std::string expect = std::string("[") + name + " " + std::to_string(rows) + " " + std::to_string(cols) + "]";
    if (header != expect) {
      schema_error(path_, "line " + std::to_string(line_no_) + ": expected '" + expect + "', got '" + header + "'");
    }
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      const std::string s = line();
      const char* p = s.c_str();
      for (Index j = 0; j < cols; ++j) {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(p, &end);
        if (end == p || errno == ERANGE) {
          schema_error(path_, "line " + std::to_string(line_no_) + ": expected " + std::to_string(cols) + " numbers");
        }
        m(i, j) = v;
        p = end;
      }
      while (*p == ' ') ++p;
      if (*p != '\0') schema_error(path_, "line " + std::to_string(line_no_) + ": trailing data");
    }
    return m;
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& is_;
  std::string path_;
  int line_no_ = 0;
};

}  // namespace

std::string to_string(BDistribution d) { return d == BDistribution::Bernoulli ? "bernoulli" : "gaussian"; }

BDistribution b_distribution_from_string(const std::string& s) {
  if (s == "bernoulli") return BDistribution::Bernoulli;
  if (s == "gaussian") return BDistribution::Gaussian;
  throw std::invalid_argument("unknown B distribution '" + s + "' (expected bernoulli or gaussian)");
}

void DatasetSpec::validate() const {
  if (n < 1) throw std::invalid_argument("DatasetSpec: n must be >= 1");
  if (p < 1) throw std::invalid_argument("DatasetSpec: p must be >= 1");
  if (deg < 1) throw std::invalid_argument("DatasetSpec: deg must be an integer >= 1");
  if (!(noise >= 0.0 && noise < 1.0)) throw std::invalid_argument("DatasetSpec: noise half-width must lie in [0, 1)");
  if (offset < 0) throw std::invalid_argument("DatasetSpec: offset must be >= 0");
}

Matrix generate_b(const DatasetSpec& spec, Index k) {
  CounterRng rng = CounterRng(spec.seed).substream(kStreamB);
  Matrix b(k, spec.p);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < spec.p; ++j) {
      b(i, j) = spec.b_dist == BDistribution::Bernoulli ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : rng.normal();
    }
  }
  return b;
}

Vector cost_from_features(const Matrix& b, const Vector& psi, int deg, const Vector& xi) {
  if (b.cols() != psi.size() || b.rows() != xi.size()) throw std::invalid_argument("cost_from_features: size mismatch");
  const double inv_sqrt_p = 1.0 / std::sqrt(static_cast<double>(psi.size()));
  const double scale = 1.0 / std::pow(3.5, deg);
  const Vector base = ((b * psi) * inv_sqrt_p).array() + 3.0;
  Vector y(b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    y(j) = (scale * std::pow(std::max(0.0, base(j)), deg) + 1.0) * xi(j);
  }
  return y;
}

PtoDataset generate(const DatasetSpec& spec, std::shared_ptr<const Problem> problem) {
  spec.validate();
  if (!problem) throw std::invalid_argument("generate: null problem");
  const Index k = problem->pred_dim();
  const Matrix b = generate_b(spec, k);
  const CounterRng root(spec.seed);
  const CounterRng feat_root = root.substream(kStreamFeatures);
  const CounterRng noise_root = root.substream(kStreamNoise);

  PtoDataset ds;
  ds.spec = spec;
  ds.problem = problem;
  ds.features.resize(spec.n, spec.p);
  ds.costs.resize(spec.n, k);
  ds.solutions.resize(spec.n, problem->num_vars());
  for (Index i = 0; i < spec.n; ++i) {
    const auto idx = static_cast<std::uint64_t>(spec.offset + i);
    CounterRng fr = feat_root.substream(idx);
    CounterRng nr = noise_root.substream(idx);
    Vector psi(spec.p);
    for (Index j = 0; j < spec.p; ++j) psi(j) = fr.normal();
    Vector xi(k);
    for (Index j = 0; j < k; ++j) xi(j) = nr.uniform(1.0 - spec.noise, 1.0 + spec.noise);
    const Vector y = cost_from_features(b, psi, spec.deg, xi);
    const SolveResult r = problem->solve(problem->cost_map().full_cost(y));
    if (!r.optimal()) {
      throw std::runtime_error("generate: instance " + std::to_string(i) + " is " + to_string(r.status));
    }
    ds.features.row(i) = psi.transpose();
    ds.costs.row(i) = y.transpose();
    ds.solutions.row(i) = r.solution.transpose();
  }
  return ds;
}

void save_dataset(const PtoDataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << kMagic << '\n';
  os << "rng " << CounterRng::kAlgorithm << '\n';
  os << "streams B=" << kStreamB << " psi=" << kStreamFeatures << " xi=" << kStreamNoise
     << " per_instance=substream(offset+i)\n";
  os << "n " << ds.size() << '\n';
  os << "p " << ds.features.cols() << '\n';
  os << "k " << ds.costs.cols() << '\n';
  os << "vars " << ds.solutions.cols() << '\n';
  os << "deg " << ds.spec.deg << '\n';
  os << "noise " << fmt(ds.spec.noise) << '\n';
  os << "seed " << ds.spec.seed << '\n';
  os << "b_dist " << to_string(ds.spec.b_dist) << '\n';
  os << "offset " << ds.spec.offset << '\n';
  os << "base_clamp max0\n";
  os << "problem " << ds.problem->to_json().dump() << '\n';
  write_block(os, "features", ds.features);
  write_block(os, "costs", ds.costs);
  write_block(os, "solutions", ds.solutions);
  os << "[end]\n";
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

PtoDataset load_dataset(const std::string& path, int verify_count) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open dataset '" + path + "'");
  Reader rd(is, path);
  if (rd.line() != kMagic) schema_error(path, "missing '" + std::string(kMagic) + "' header");

  const std::vector<std::string> keys = {"rng", "streams", "n", "p", "k", "vars", "deg", "noise",
                                         "seed", "b_dist", "offset", "base_clamp", "problem"};
  std::map<std::string, std::string> kv;
  for (const auto& key : keys) {
    const std::string s = rd.line();
    const auto sp = s.find(' ');
    if (sp == std::string::npos || s.substr(0, sp) != key) {
      schema_error(path, "line " + std::to_string(rd.line_no()) + ": expected key '" + key + "'");
    }
    kv[key] = s.substr(sp + 1);
  }
  if (kv["rng"] != CounterRng::kAlgorithm) schema_error(path, "unsupported rng '" + kv["rng"] + "'");

  auto as_index = [&](const std::string& key) -> Index {
    try {
      size_t used = 0;
      const long long v = std::stoll(kv[key], &used);
      if (used != kv[key].size() || v < 0) throw std::invalid_argument(key);
      return static_cast<Index>(v);
    } catch (const std::exception&) {
      schema_error(path, "bad value for '" + key + "'");
    }
  };

  PtoDataset ds;
  try {
    ds.spec.n = as_index("n");
    ds.spec.p = as_index("p");
    ds.spec.deg = static_cast<int>(as_index("deg"));
    ds.spec.noise = std::stod(kv["noise"]);
    ds.spec.seed = std::stoull(kv["seed"]);
    ds.spec.b_dist = b_distribution_from_string(kv["b_dist"]);
    ds.spec.offset = as_index("offset");
    ds.problem = std::make_shared<const Problem>(Problem::from_json(nlohmann::json::parse(kv["problem"])));
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& e) {
    schema_error(path, std::string("bad header: ") + e.what());
  }
  const Index k = as_index("k");
  const Index vars = as_index("vars");
  if (k != ds.problem->pred_dim() || vars != ds.problem->num_vars()) {
    schema_error(path, "k/vars do not match the embedded problem");
  }
  ds.features = rd.block("features", ds.spec.n, ds.spec.p);
  ds.costs = rd.block("costs", ds.spec.n, k);
  ds.solutions = rd.block("solutions", ds.spec.n, vars);
  if (rd.line() != "[end]") schema_error(path, "missing [end] marker");

  if (verify_count > 0 && ds.size() > 0) {
    const Problem& prob = *ds.problem;
    CounterRng pick = CounterRng(ds.spec.seed).substream(0x766572696679ULL);  // "verify"
    const Index count = std::min<Index>(verify_count, ds.size());
    std::vector<bool> seen(static_cast<size_t>(ds.size()), false);
    for (Index c = 0; c < count; ++c) {
      Index i = count == ds.size() ? c : static_cast<Index>(pick.uniform_int(0, ds.size() - 1));
      while (seen[static_cast<size_t>(i)]) i = (i + 1) % ds.size();
      seen[static_cast<size_t>(i)] = true;
      const Vector cost = prob.cost_map().full_cost(ds.costs.row(i).transpose());
      const Vector w = ds.solutions.row(i).transpose();
      const SolveResult r = prob.solve(cost);
      const double stored = cost.dot(w);
      const double tol = 1e-6 * std::max(1.0, std::abs(r.objective));
      if (!prob.is_feasible(w, 1e-6) || std::abs(stored - r.objective) > tol) {
        throw std::runtime_error("verification failed: instance " + std::to_string(i) + " in '" + path +
                                 "': stored objective " + fmt(stored) + ", solver " + fmt(r.objective));
      }
    }
  }
  return ds;
}

}  // namespace dfl
