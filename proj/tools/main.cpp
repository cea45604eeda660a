// Command-line front end: declarative model specs, sampling to NDJSON files,
// density scoring, KL divergence with optional Monte Carlo cross-checks,
// kernel density estimation, and a self-check suite.
//
// Exit codes: 0 success, 1 self-check failure, 2 parse error (arguments,
// JSON, or model spec), 3 parameter/shape validation error, 4 KL pair
// without a registered closed form.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "distkit/distkit.hpp"

namespace {

using distkit::BijectorPtr;
using distkit::Distribution;
using distkit::DistributionPtr;
using distkit::DType;
using distkit::make_rng;
using distkit::ModelSpec;
using distkit::ModelSpecOptions;
using distkit::NdArray;
using distkit::RngState;
using distkit::Shape;
using spec_json = distkit::spec_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw distkit::SpecParseError("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw distkit::Error("cannot open output file '" + out_path + "'");
  out << content;
}

DType parse_precision(const std::string& precision) {
  return precision == "f32" ? DType::F32 : DType::F64;
}

// Nonfinite doubles have no JSON number form; encode them as strings so the
// output stays lossless and byte-stable.
spec_json number_json(double v) {
  if (std::isfinite(v)) return spec_json(v);
  if (std::isnan(v)) return spec_json("nan");
  return spec_json(v > 0 ? "inf" : "-inf");
}

spec_json shape_json(const Shape& shape) {
  spec_json out = spec_json::array();
  for (std::int64_t i = 0; i < shape.rank(); ++i) out.push_back(shape[i]);
  return out;
}

spec_json values_json(const NdArray& a, std::int64_t offset, std::int64_t count) {
  spec_json out = spec_json::array();
  for (std::int64_t i = 0; i < count; ++i) {
    if (a.dtype() == DType::I64) {
      out.push_back(a.get_i64(offset + i));
    } else {
      out.push_back(number_json(a.get(offset + i)));
    }
  }
  return out;
}

// One NDJSON record per leading-axis slice of `draw`.
std::string draw_records(const NdArray& draw, const Distribution& dist,
                         std::int64_t n) {
  const std::int64_t block = n == 0 ? 0 : draw.size() / n;
  std::string out;
  for (std::int64_t i = 0; i < n; ++i) {
    spec_json rec;
    rec["index"] = i;
    rec["shape"] = shape_json(draw.shape());
    rec["batch_shape"] = shape_json(dist.batch_shape());
    rec["event_shape"] = shape_json(dist.event_shape());
    rec["value"] = values_json(draw, i * block, block);
    out += rec.dump();
    out += '\n';
  }
  return out;
}

int cmd_sample(const std::string& model_path, std::int64_t n, std::uint64_t seed,
               const std::string& out_path, const std::string& precision) {
  ModelSpecOptions options;
  options.dtype = parse_precision(precision);
  const DistributionPtr dist = ModelSpec::parse(read_file(model_path)).build(options);
  RngState rng = make_rng(seed);
  const NdArray draw = dist->sample(Shape{n}, rng);
  write_output(out_path, draw_records(draw, *dist, n));
  return 0;
}

int cmd_logprob(const std::string& model_path, const std::string& data_path,
                const std::string& out_path, const std::string& precision) {
  ModelSpecOptions options;
  options.dtype = parse_precision(precision);
  const DistributionPtr dist = ModelSpec::parse(read_file(model_path)).build(options);
  const NdArray data = distkit::load_points_file(data_path, options.dtype);
  const std::int64_t n = data.shape()[0];
  const NdArray lp = dist->log_prob(data);
  const std::int64_t block = lp.size() / n;
  std::string out;
  for (std::int64_t i = 0; i < n; ++i) {
    spec_json rec;
    rec["index"] = i;
    rec["shape"] = shape_json(lp.shape());
    rec["value"] = values_json(lp, i * block, block);
    out += rec.dump();
    out += '\n';
  }
  write_output(out_path, out);
  return 0;
}

int cmd_kl(const std::string& p_path, const std::string& q_path, std::int64_t mc,
           std::uint64_t seed, const std::string& out_path,
           const std::string& precision) {
  ModelSpecOptions options;
  options.dtype = parse_precision(precision);
  const DistributionPtr p = ModelSpec::parse(read_file(p_path)).build(options);
  const DistributionPtr q = ModelSpec::parse(read_file(q_path)).build(options);
  const NdArray kl = distkit::kl_divergence(p, q);
  spec_json rec;
  rec["kl"] = values_json(kl, 0, kl.size());
  rec["shape"] = shape_json(kl.shape());
  if (mc > 0) {
    RngState rng = make_rng(seed);
    const NdArray y = p->sample(Shape{mc}, rng);
    const NdArray diff = p->log_prob(y) - q->log_prob(y);
    const std::int64_t block = diff.size() / mc;
    spec_json means = spec_json::array();
    spec_json errors = spec_json::array();
    for (std::int64_t j = 0; j < block; ++j) {
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::int64_t i = 0; i < mc; ++i) {
        const double v = diff.get(i * block + j);
        sum += v;
        sum_sq += v * v;
      }
      const double mean = sum / static_cast<double>(mc);
      const double var =
          std::max(0.0, sum_sq / static_cast<double>(mc) - mean * mean);
      means.push_back(number_json(mean));
      errors.push_back(number_json(std::sqrt(var / static_cast<double>(mc))));
    }
    rec["mc"] = means;
    rec["se"] = errors;
    rec["n"] = mc;
  }
  write_output(out_path, rec.dump() + "\n");
  return 0;
}

int cmd_kde(const std::string& data_path, double bandwidth, std::int64_t n,
            std::uint64_t seed, const std::string& out_path,
            const std::string& precision) {
  const DType dtype = parse_precision(precision);
  const NdArray points = distkit::load_points_file(data_path, dtype);
  const auto dist = distkit::kde(points, bandwidth);
  RngState rng = make_rng(seed);
  const NdArray draw = dist->sample(Shape{n}, rng);
  write_output(out_path, draw_records(draw, *dist, n));
  return 0;
}

// --- selfcheck -------------------------------------------------------------

struct CheckReport {
  std::string lines;
  int failures = 0;

  void add(const std::string& name, bool ok, spec_json details) {
    details["check"] = name;
    details["status"] = ok ? "ok" : "fail";
    lines += details.dump();
    lines += '\n';
    if (!ok) ++failures;
  }
};

void check_moments(CheckReport& report, std::uint64_t seed) {
  struct Case {
    const char* name;
    DistributionPtr dist;
  };
  const std::vector<Case> cases = {
      {"Normal", std::make_shared<distkit::Normal>(NdArray::scalar(0.5),
                                                   NdArray::scalar(1.3))},
      {"Exponential", std::make_shared<distkit::Exponential>(NdArray::scalar(2.0))},
      {"Gamma", std::make_shared<distkit::Gamma>(NdArray::scalar(3.0),
                                                 NdArray::scalar(2.0))},
  };
  const std::int64_t n = 100000;
  for (const Case& c : cases) {
    RngState rng = make_rng(seed);
    const NdArray draw = c.dist->sample(Shape{n}, rng);
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) sum += draw.get(i);
    const double mean = sum / static_cast<double>(n);
    const double expected = c.dist->mean().get(0);
    const double se = c.dist->stddev().get(0) / std::sqrt(static_cast<double>(n));
    spec_json details;
    details["family"] = c.name;
    details["sample_mean"] = number_json(mean);
    details["analytic_mean"] = number_json(expected);
    details["standard_error"] = number_json(se);
    report.add(std::string("moments/") + c.name,
               std::fabs(mean - expected) < 5.0 * se, std::move(details));
  }
}

void check_ks(CheckReport& report, std::uint64_t seed) {
  struct Case {
    const char* name;
    DistributionPtr dist;
  };
  const std::vector<Case> cases = {
      {"Normal", std::make_shared<distkit::Normal>(NdArray::scalar(0.0),
                                                   NdArray::scalar(1.0))},
      {"Exponential", std::make_shared<distkit::Exponential>(NdArray::scalar(1.0))},
  };
  const std::int64_t n = 10000;
  for (const Case& c : cases) {
    RngState rng = make_rng(seed + 1);
    const NdArray draw = c.dist->sample(Shape{n}, rng);
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = draw.get(i);
    std::sort(xs.begin(), xs.end());
    NdArray sorted = NdArray::zeros(Shape{n}, DType::F64);
    for (std::int64_t i = 0; i < n; ++i) sorted.set(i, xs[static_cast<std::size_t>(i)]);
    const NdArray cdf = c.dist->cdf(sorted);
    double stat = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double u = cdf.get(i);
      const double lo = static_cast<double>(i) / static_cast<double>(n);
      const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
      stat = std::max(stat, std::max(std::fabs(u - lo), std::fabs(hi - u)));
    }
    const double threshold = 1.63 / std::sqrt(static_cast<double>(n));
    spec_json details;
    details["family"] = c.name;
    details["ks_statistic"] = number_json(stat);
    details["threshold"] = number_json(threshold);
    report.add(std::string("ks/") + c.name, stat < threshold, std::move(details));
  }
}

void check_jacobians(CheckReport& report) {
  struct Case {
    const char* name;
    BijectorPtr bijector;
    std::vector<double> points;
  };
  const std::vector<Case> cases = {
      {"exp", std::make_shared<distkit::Exp>(), {-1.5, 0.0, 0.7, 2.0}},
      {"sigmoid", std::make_shared<distkit::Sigmoid>(), {-3.0, -0.2, 1.1, 4.0}},
      {"softplus", std::make_shared<distkit::Softplus>(), {-2.0, 0.3, 1.9}},
      {"affine",
       std::make_shared<distkit::Affine>(NdArray::scalar(0.3), 1.7),
       {-1.0, 0.0, 2.5}},
  };
  for (const Case& c : cases) {
    double max_roundtrip = 0.0;
    double max_ldj_sum = 0.0;
    for (double x : c.points) {
      const NdArray xs = NdArray::scalar(x);
      const NdArray y = c.bijector->forward(xs);
      max_roundtrip =
          std::max(max_roundtrip, std::fabs(c.bijector->inverse(y).get(0) - x));
      const double fldj = c.bijector->forward_log_det_jacobian(xs, 0).get(0);
      const double ildj = c.bijector->inverse_log_det_jacobian(y, 0).get(0);
      max_ldj_sum = std::max(max_ldj_sum, std::fabs(fldj + ildj));
    }
    spec_json details;
    details["bijector"] = c.name;
    details["max_roundtrip_error"] = number_json(max_roundtrip);
    details["max_fldj_plus_ildj"] = number_json(max_ldj_sum);
    report.add(std::string("jacobian/") + c.name,
               max_roundtrip < 1e-9 && max_ldj_sum < 1e-12, std::move(details));
  }
}

void check_cache(CheckReport& report, std::uint64_t seed) {
  const bool enabled_at_start = distkit::cache_enabled();
  const auto base = std::make_shared<distkit::Normal>(NdArray::scalar(0.0),
                                                      NdArray::scalar(1.0));

  auto run = [&](bool with_cache, std::uint64_t* inverse_kernels) {
    distkit::set_cache_enabled(with_cache);
    const auto bijector = std::make_shared<distkit::Exp>();
    const distkit::TransformedDistribution dist(base, bijector);
    RngState rng = make_rng(seed + 2);
    const NdArray y = dist.sample(Shape{256}, rng);
    const NdArray lp = dist.log_prob(y);
    if (inverse_kernels != nullptr) *inverse_kernels = bijector->inverse_kernel_count();
    return lp;
  };

  std::uint64_t kernels_in_mode = 0;
  const NdArray lp_mode = run(enabled_at_start, &kernels_in_mode);
  const NdArray lp_uncached = run(false, nullptr);
  distkit::set_cache_enabled(enabled_at_start);

  double max_delta = 0.0;
  bool finite = true;
  for (std::int64_t i = 0; i < lp_mode.size(); ++i) {
    max_delta = std::max(max_delta, std::fabs(lp_mode.get(i) - lp_uncached.get(i)));
    finite = finite && std::isfinite(lp_mode.get(i));
  }
  const bool kernel_count_matches_mode =
      enabled_at_start ? kernels_in_mode == 0 : kernels_in_mode > 0;
  spec_json details;
  details["cache_enabled"] = enabled_at_start;
  details["inverse_kernels_after_sample_logprob"] = kernels_in_mode;
  details["logprob_max_delta_vs_uncached"] = number_json(max_delta);
  report.add("cache",
             kernel_count_matches_mode && finite && max_delta < 1e-9,
             std::move(details));
}

void check_spec_roundtrip(CheckReport& report) {
  const std::vector<std::string> specs = {
      R"({"family":"Normal","params":{"loc":0.0,"scale":1.0}})",
      R"({"transformed":{"base":{"family":"Normal","params":{"loc":0.0,"scale":1.0}},)"
      R"("bijectors":[{"type":"exp"}]}})",
      R"({"mixture":{"probs":[0.2,0.8],"components":{"family":"Normal",)"
      R"("params":{"loc":[-1.0,1.0],"scale":[0.5,0.5]}}}})",
  };
  bool ok = true;
  for (const std::string& text : specs) {
    const ModelSpec spec = ModelSpec::parse(text);
    ok = ok && ModelSpec::parse(spec.print()) == spec;
  }
  spec_json details;
  details["specs_checked"] = specs.size();
  report.add("spec_roundtrip", ok, std::move(details));
}

int cmd_selfcheck(std::uint64_t seed, const std::string& out_path) {
  CheckReport report;
  check_moments(report, seed);
  check_ks(report, seed);
  check_jacobians(report);
  check_cache(report, seed);
  check_spec_roundtrip(report);
  spec_json summary;
  summary["check"] = "summary";
  summary["failures"] = report.failures;
  summary["cache_enabled"] = distkit::cache_enabled();
  report.lines += summary.dump();
  report.lines += '\n';
  write_output(out_path, report.lines);
  return report.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distkit: sampling, scoring, divergence, and KDE tools"};
  app.require_subcommand(1);

  std::string model_path;
  std::string second_model_path;
  std::string data_path;
  std::string out_path;
  std::string precision = "f64";
  std::int64_t n = 1;
  std::int64_t mc = 0;
  std::uint64_t seed = 0;
  double bandwidth = 1.0;

  CLI::App* sample = app.add_subcommand("sample", "Draw samples as NDJSON records");
  sample->add_option("--model", model_path, "Model spec JSON file")->required();
  sample->add_option("--n", n, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("--out", out_path, "Output file (default stdout)");
  sample->add_option("--precision", precision, "Floating precision")
      ->check(CLI::IsMember({"f32", "f64"}));

  CLI::App* logprob = app.add_subcommand("logprob", "Score NDJSON records");
  logprob->add_option("--model", model_path, "Model spec JSON file")->required();
  logprob->add_option("--data", data_path, "NDJSON data file")->required();
  logprob->add_option("--out", out_path, "Output file (default stdout)");
  logprob->add_option("--precision", precision, "Floating precision")
      ->check(CLI::IsMember({"f32", "f64"}));

  CLI::App* kl = app.add_subcommand("kl", "Closed-form KL divergence");
  kl->add_option("p", model_path, "Model spec for p")->required();
  kl->add_option("q", second_model_path, "Model spec for q")->required();
  kl->add_option("--mc", mc, "Monte Carlo cross-check sample count")
      ->check(CLI::NonNegativeNumber);
  kl->add_option("--seed", seed, "RNG seed");
  kl->add_option("--out", out_path, "Output file (default stdout)");
  kl->add_option("--precision", precision, "Floating precision")
      ->check(CLI::IsMember({"f32", "f64"}));

  CLI::App* kde = app.add_subcommand("kde", "Sample a Gaussian KDE fit to data");
  kde->add_option("--data", data_path, "NDJSON points file")->required();
  kde->add_option("--bandwidth", bandwidth, "Kernel bandwidth")
      ->check(CLI::PositiveNumber);
  kde->add_option("--n", n, "Number of samples")->check(CLI::PositiveNumber);
  kde->add_option("--seed", seed, "RNG seed");
  kde->add_option("--out", out_path, "Output file (default stdout)");
  kde->add_option("--precision", precision, "Floating precision")
      ->check(CLI::IsMember({"f32", "f64"}));

  CLI::App* selfcheck =
      app.add_subcommand("selfcheck", "Run KS/moment/Jacobian/cache suites");
  selfcheck->add_option("--seed", seed, "RNG seed");
  selfcheck->add_option("--out", out_path, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sample->parsed()) return cmd_sample(model_path, n, seed, out_path, precision);
    if (logprob->parsed()) return cmd_logprob(model_path, data_path, out_path, precision);
    if (kl->parsed()) {
      return cmd_kl(model_path, second_model_path, mc, seed, out_path, precision);
    }
    if (kde->parsed()) return cmd_kde(data_path, bandwidth, n, seed, out_path, precision);
    return cmd_selfcheck(seed, out_path);
  } catch (const distkit::SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const distkit::NotImplementedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const distkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
