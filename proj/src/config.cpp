#include "specfilter/core/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

namespace specfilter {

namespace {

void check_keys(const OrderedJson& obj, const std::set<std::string>& allowed, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.contains(key))
      raise(errc::invalid_argument,
            std::string("unknown key '") + key + "' in " + where);
  }
}

double get_number(const OrderedJson& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  require(v.is_number(), errc::invalid_argument, std::string("'") + key + "' must be a number");
  return v.get<double>();
}

long get_integer(const OrderedJson& obj, const char* key, long fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  require(v.is_number_integer() || v.is_number_unsigned(), errc::invalid_argument,
          std::string("'") + key + "' must be an integer");
  return v.get<long>();
}

std::uint64_t get_seed(const OrderedJson& obj, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  require(v.is_number_integer() || v.is_number_unsigned(), errc::invalid_argument,
          std::string("'") + key + "' must be an integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const OrderedJson& obj, const char* key) {
  require(obj.contains(key), errc::invalid_argument,
          std::string("missing required key '") + key + "'");
  const auto& v = obj.at(key);
  require(v.is_string(), errc::invalid_argument, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> get_vector(const OrderedJson& obj, const char* key) {
  const auto& v = obj.at(key);
  require(v.is_array(), errc::invalid_argument, std::string("'") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) {
    require(item.is_number(), errc::invalid_argument,
            std::string("'") + key + "' must contain only numbers");
    out.push_back(item.get<double>());
  }
  return out;
}

std::vector<double> polynomial_decay(int n, double p) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = std::pow(static_cast<double>(i + 1), -p);
  return out;
}

// Fisher-Yates driven by the instance-generation stream.
void shuffle(std::vector<double>& values, RandomStream& stream) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(stream.next_uniform() * i);
    std::swap(values[i - 1], values[std::min(j, i - 1)]);
  }
}

std::vector<int> sample_positions(int n, int count, RandomStream& stream) {
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[i] = i;
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(stream.next_uniform() * (n - i));
    std::swap(all[i], all[std::min(j, n - 1)]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

OrderedJson merge_overrides(OrderedJson config, const OrderedJson& overrides) {
  for (const auto& [key, value] : overrides.items()) config[key] = value;
  return config;
}

std::pair<ProblemInstance, OrderedJson> materialize_instance(const OrderedJson& spec,
                                                             std::uint64_t default_seed,
                                                             const std::string& base_dir) {
  if (spec.is_string()) {
    // path to a previously generated instance file
    namespace fs = std::filesystem;
    fs::path path(spec.get<std::string>());
    if (path.is_relative() && !base_dir.empty()) path = fs::path(base_dir) / path;
    const OrderedJson doc = parse_json(read_file(path.string()));
    require(doc.is_object() && doc.contains("schema") &&
                doc.at("schema") == kInstanceSchema,
            errc::invalid_argument,
            "instance file '" + path.string() + "' must carry schema '" +
                std::string(kInstanceSchema) + "'");
    OrderedJson inner = doc;
    inner.erase("schema");
    return materialize_instance(inner, default_seed, base_dir);
  }

  require(spec.is_object(), errc::invalid_argument,
          "'instance' must be an object or a path string");
  check_keys(spec,
             {"n", "sigma", "b", "x", "matrix", "tolerance", "spectrum", "coefficients", "seed",
              "provenance"},
             "'instance'");

  const double sigma = get_number(spec, "sigma", 0.0);
  require(sigma > 0.0, errc::invalid_argument, "'instance.sigma' must be > 0");
  const std::uint64_t seed = get_seed(spec, "seed", default_seed);
  RandomStream stream = make_stream(seed, StreamPurpose::instance_gen, 0);

  const auto resolve_path = [&](const std::string& path) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
    return p.string();
  };

  // operator: explicit spectrum, CSV matrix, spectrum-only JSON file, or a law
  std::optional<SingularSystem> system;
  std::vector<double> b;
  OrderedJson spectrum_echo;
  if (spec.contains("b")) {
    require(!spec.contains("spectrum") && !spec.contains("matrix"), errc::invalid_argument,
            "'instance' takes exactly one of 'b', 'matrix' and 'spectrum'");
    b = get_vector(spec, "b");
    spectrum_echo["law"] = "explicit";
  } else if (spec.contains("matrix")) {
    require(!spec.contains("spectrum"), errc::invalid_argument,
            "'instance' takes exactly one of 'b', 'matrix' and 'spectrum'");
    require(spec.at("matrix").is_string(), errc::invalid_argument,
            "'instance.matrix' must be a CSV file path");
    const std::string path = resolve_path(spec.at("matrix").get<std::string>());
    const double tolerance = get_number(spec, "tolerance", 1e-10);
    const DenseMatrix m = load_matrix_csv(read_file(path));
    system = SingularSystem::from_matrix(m.data, m.rows, m.cols, tolerance);
    b.assign(system->spectrum().begin(), system->spectrum().end());
    spectrum_echo["law"] = "matrix";
    spectrum_echo["matrix"] = spec.at("matrix").get<std::string>();
    spectrum_echo["tolerance"] = tolerance;
  } else if (spec.contains("spectrum") && spec.at("spectrum").is_string()) {
    // spectrum-only operator file {"b": [...]}
    const std::string path = resolve_path(spec.at("spectrum").get<std::string>());
    const OrderedJson doc = parse_json(read_file(path));
    require(doc.is_object() && doc.contains("b"), errc::parse_error,
            "operator file '" + path + "' must be a JSON object with an array 'b'");
    b = get_vector(doc, "b");
    spectrum_echo["law"] = "spectrum-file";
    spectrum_echo["path"] = spec.at("spectrum").get<std::string>();
  } else {
    require(spec.contains("spectrum"), errc::invalid_argument,
            "'instance' needs one of 'b', 'matrix' or a 'spectrum' law");
    const auto& law = spec.at("spectrum");
    check_keys(law, {"law", "p"}, "'instance.spectrum'");
    const std::string name = get_string(law, "law");
    const long n = get_integer(spec, "n", 0);
    require(n >= 1, errc::invalid_argument, "'instance.n' must be >= 1 for generated spectra");
    if (name == "polynomial") {
      const double p = get_number(law, "p", 1.0);
      require(p >= 0.0, errc::invalid_argument, "spectrum decay exponent must be >= 0");
      b = polynomial_decay(static_cast<int>(n), p);
      spectrum_echo["law"] = "polynomial";
      spectrum_echo["p"] = p;
    } else {
      raise(errc::unknown_family, "unknown spectrum law '" + name + "'");
    }
  }
  const int n = static_cast<int>(b.size());
  if (spec.contains("n"))
    require(get_integer(spec, "n", 0) == n, errc::dimension_mismatch,
            "'instance.n' disagrees with the spectrum length");

  // coefficients
  std::vector<double> x;
  OrderedJson coeff_echo;
  if (spec.contains("x")) {
    require(!spec.contains("coefficients"), errc::invalid_argument,
            "'instance' cannot carry both 'x' and 'coefficients'");
    x = get_vector(spec, "x");
    coeff_echo["law"] = "explicit";
  } else {
    require(spec.contains("coefficients"), errc::invalid_argument,
            "'instance' needs either 'x' or a 'coefficients' law");
    const auto& law = spec.at("coefficients");
    check_keys(law, {"law", "p", "count", "amplitude", "positions"}, "'instance.coefficients'");
    const std::string name = get_string(law, "law");
    if (name == "polynomial") {
      const double p = get_number(law, "p", 1.0);
      x = polynomial_decay(n, p);
      coeff_echo["law"] = "polynomial";
      coeff_echo["p"] = p;
    } else if (name == "permuted-polynomial") {
      const double p = get_number(law, "p", 1.0);
      x = polynomial_decay(n, p);
      shuffle(x, stream);
      coeff_echo["law"] = "permuted-polynomial";
      coeff_echo["p"] = p;
    } else if (name == "sparse-spikes") {
      const long count = get_integer(law, "count", 1);
      require(count >= 1 && count <= n, errc::invalid_argument,
              "'coefficients.count' must lie in [1, n]");
      const double amplitude = get_number(law, "amplitude", 3.0);
      std::vector<int> positions;
      if (law.contains("positions")) {
        for (double v : get_vector(law, "positions")) {
          const int one_based = static_cast<int>(v);
          require(one_based >= 1 && one_based <= n, errc::invalid_argument,
                  "spike positions are one-based indices in [1, n]");
          positions.push_back(one_based - 1);
        }
        require(static_cast<long>(positions.size()) == count, errc::invalid_argument,
                "'coefficients.positions' length must equal 'count'");
      } else {
        positions = sample_positions(n, static_cast<int>(count), stream);
      }
      x.assign(static_cast<std::size_t>(n), 0.0);
      for (int pos : positions) x[pos] = amplitude;
      coeff_echo["law"] = "sparse-spikes";
      coeff_echo["count"] = count;
      coeff_echo["amplitude"] = amplitude;
      OrderedJson pos_echo = OrderedJson::array();
      for (int pos : positions) pos_echo.push_back(pos + 1);
      coeff_echo["positions"] = pos_echo;
    } else {
      raise(errc::unknown_family, "unknown coefficient law '" + name + "'");
    }
  }

  ProblemInstance instance(system ? std::move(*system) : SingularSystem::from_spectrum(b),
                           std::move(x), sigma);

  OrderedJson echo;
  echo["n"] = n;
  echo["b"] = OrderedJson(b);
  echo["x"] = OrderedJson(instance.x);
  echo["sigma"] = sigma;
  OrderedJson provenance;
  provenance["spectrum"] = spectrum_echo;
  provenance["coefficients"] = coeff_echo;
  provenance["seed"] = seed;
  echo["provenance"] = provenance;
  return {std::move(instance), std::move(echo)};
}

ResolvedConfig resolve_config(const OrderedJson& doc, const std::string& base_dir,
                              bool need_instance) {
  require(doc.is_object(), errc::invalid_argument, "config must be a JSON object");
  check_keys(doc,
             {"schema", "instance", "noise", "xi", "estimators", "replications", "seed", "threads",
              "beta", "alpha", "K", "tail_samples", "emit_plot_data"},
             "config");
  require(doc.contains("schema"), errc::invalid_argument, "config is missing 'schema'");
  require(doc.at("schema") == kConfigSchema, errc::invalid_argument,
          std::string("config schema must be '") + kConfigSchema + "'");

  ResolvedConfig out;
  out.mc.replications = get_integer(doc, "replications", 10000);
  require(out.mc.replications >= 2, errc::invalid_argument, "'replications' must be >= 2");
  out.mc.seed = get_seed(doc, "seed", 0);
  out.mc.threads = static_cast<int>(get_integer(doc, "threads", 0));
  require(out.mc.threads >= 0, errc::invalid_argument, "'threads' must be >= 0");
  out.mc.beta = get_number(doc, "beta", 3.0);
  require(out.mc.beta > 0.0, errc::invalid_argument, "'beta' must be > 0");
  out.mc.alpha = get_number(doc, "alpha", 1.0);
  require(out.mc.alpha > 0.0, errc::invalid_argument, "'alpha' must be > 0");
  out.tail_samples = get_integer(doc, "tail_samples", 100000);
  require(out.tail_samples >= 10000, errc::invalid_argument, "'tail_samples' must be >= 10^4");
  if (doc.contains("emit_plot_data")) {
    require(doc.at("emit_plot_data").is_boolean(), errc::invalid_argument,
            "'emit_plot_data' must be a boolean");
    out.emit_plot_data = doc.at("emit_plot_data").get<bool>();
  }

  // epsilon noise family and its claimed tail envelope
  NoiseFamily family = NoiseFamily::gaussian;
  if (doc.contains("noise")) {
    const auto& noise = doc.at("noise");
    check_keys(noise, {"family", "K"}, "'noise'");
    family = parse_noise_family(get_string(noise, "family"));
  }
  out.mc.noise.family = family;
  out.mc.noise.certificate.beta = out.mc.beta;
  if (doc.contains("K")) {
    out.K = get_number(doc, "K", 0.0);
  } else if (doc.contains("noise") && doc.at("noise").contains("K")) {
    out.K = get_number(doc.at("noise"), "K", 0.0);
  } else {
    require(family != NoiseFamily::gaussian || out.mc.beta > 2.0, errc::invalid_argument,
            "Gaussian noise has no default envelope constant for beta <= 2; pass 'K' explicitly");
    out.K = default_certificate1(family, out.mc.beta).K;
  }
  require(out.K > 0.0, errc::invalid_argument, "'K' must be > 0");
  out.mc.noise.certificate.K = out.K;

  // xi block (noisy-operator experiments)
  OrderedJson xi_echo;
  if (doc.contains("xi")) {
    const auto& xij = doc.at("xi");
    check_keys(xij, {"family", "s", "alpha", "beta_prime", "K_prime", "C", "mode", "values"},
               "'xi'");
    XiConfig xi;
    xi.noise.family = parse_noise_family(get_string(xij, "family"));
    xi.noise.scale = get_number(xij, "s", 0.0);
    require(xi.noise.scale > 0.0, errc::invalid_argument, "'xi.s' must be > 0");
    xi.alpha = get_number(xij, "alpha", out.mc.alpha);
    require(xi.alpha > 0.0, errc::invalid_argument, "'xi.alpha' must be > 0");
    const double betaprime = get_number(xij, "beta_prime", 3.0);
    require(betaprime > 0.0, errc::invalid_argument, "'xi.beta_prime' must be > 0");
    TailCertificate2 cert;
    if (xij.contains("K_prime") && xij.contains("C")) {
      cert.betaprime = betaprime;
      cert.Kprime = get_number(xij, "K_prime", 0.0);
      cert.C = get_number(xij, "C", 0.0);
    } else {
      cert = default_certificate2(xi.noise.family, betaprime, xi.alpha);
      if (xij.contains("K_prime")) cert.Kprime = get_number(xij, "K_prime", 0.0);
      if (xij.contains("C")) cert.C = get_number(xij, "C", 0.0);
    }
    require(cert.Kprime > 0.0, errc::invalid_argument, "'xi.K_prime' must be > 0");
    xi.certificate = cert;
    xi.noise.certificate.K = cert.Kprime;
    xi.noise.certificate.beta = cert.betaprime;
    if (xij.contains("mode")) {
      const std::string mode = get_string(xij, "mode");
      if (mode == "conditional")
        xi.conditional = true;
      else if (mode == "random")
        xi.conditional = false;
      else
        raise(errc::invalid_argument, "'xi.mode' must be 'conditional' or 'random'");
    }
    if (xij.contains("values")) xi.values = get_vector(xij, "values");
    out.mc.xi = xi;

    xi_echo["family"] = noise_family_name(xi.noise.family);
    xi_echo["s"] = xi.noise.scale;
    xi_echo["alpha"] = xi.alpha;
    xi_echo["beta_prime"] = cert.betaprime;
    xi_echo["K_prime"] = cert.Kprime;
    xi_echo["C"] = cert.C;
    xi_echo["mode"] = xi.conditional ? "conditional" : "random";
  }

  // estimators
  if (doc.contains("estimators")) {
    const auto& list = doc.at("estimators");
    require(list.is_array(), errc::invalid_argument, "'estimators' must be an array");
    for (const auto& item : list) {
      require(item.is_string(), errc::invalid_argument, "'estimators' entries must be strings");
      const std::string id = item.get<std::string>();
      const EstimatorSpec spec = parse_estimator(id);
      require(!spec.needs_xi() || out.mc.xi.has_value(), errc::invalid_argument,
              "estimator '" + id + "' needs an 'xi' block");
      out.estimator_ids.push_back(id);
    }
  }

  // instance
  OrderedJson instance_echo;
  if (doc.contains("instance")) {
    auto [instance, echo] = materialize_instance(doc.at("instance"), out.mc.seed, base_dir);
    if (out.mc.xi && out.mc.xi->values)
      require(out.mc.xi->values->size() == static_cast<std::size_t>(instance.n()),
              errc::dimension_mismatch, "'xi.values' length must equal n");
    out.instance = std::move(instance);
    instance_echo = std::move(echo);
  } else {
    require(!need_instance, errc::invalid_argument, "this command needs an 'instance' block");
  }

  OrderedJson echo;
  echo["schema"] = kConfigSchema;
  if (out.instance) echo["instance"] = instance_echo;
  OrderedJson noise_echo;
  noise_echo["family"] = noise_family_name(family);
  noise_echo["K"] = out.K;
  echo["noise"] = noise_echo;
  if (out.mc.xi) echo["xi"] = xi_echo;
  if (!out.estimator_ids.empty()) {
    OrderedJson list = OrderedJson::array();
    for (const auto& id : out.estimator_ids) list.push_back(id);
    echo["estimators"] = list;
  }
  echo["replications"] = out.mc.replications;
  echo["seed"] = out.mc.seed;
  echo["threads"] = out.mc.threads;
  echo["beta"] = out.mc.beta;
  echo["alpha"] = out.mc.alpha;
  echo["tail_samples"] = out.tail_samples;
  echo["emit_plot_data"] = out.emit_plot_data;
  out.echo = std::move(echo);
  return out;
}

}  // namespace specfilter
