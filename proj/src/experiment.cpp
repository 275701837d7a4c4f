#include "sawchan/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "sawchan/classical.hpp"
#include "sawchan/errors.hpp"
#include "sawchan/parallel.hpp"
#include "sawchan/stats.hpp"

namespace sawchan::expt {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// ---- text helpers ---------------------------------------------------------

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad_field(std::string_view key, std::string_view why) {
  throw ValidationError("config field '" + std::string(key) + "': " + std::string(why));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    bad_field(key, "cannot parse '" + std::string(text) + "' as a number");
  }
  return value;
}

// Also accepts sqrt2 and -sqrt2.
double parse_real(std::string_view key, std::string_view text) {
  if (text == "sqrt2") return kSqrt2;
  if (text == "-sqrt2") return -kSqrt2;
  return parse_number<double>(key, text);
}

template <class T, class Fn>
std::vector<T> parse_list(std::string_view key, std::string_view text, Fn&& one) {
  std::vector<T> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) bad_field(key, "empty list element");
    out.push_back(one(key, item));
  }
  return out;
}

memory::InitialEnvironment parse_omega0(std::string_view key, std::string_view text) {
  if (text == "haar") return memory::InitialEnvironment::haar(0);
  constexpr std::string_view prefix = "momentum:";
  if (text.starts_with(prefix)) {
    return memory::InitialEnvironment::momentum(parse_number<int>(key, text.substr(prefix.size())));
  }
  bad_field(key, "expected 'haar' or 'momentum:<index>', got '" + std::string(text) + "'");
}

std::string omega0_text(const memory::InitialEnvironment& e) {
  return e.kind == memory::InitialEnvironment::Kind::Haar ? "haar" : "momentum:" + std::to_string(e.index);
}

template <class T, class Fn>
std::string join(const std::vector<T>& xs, Fn&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += fmt(xs[i]);
  }
  return out;
}

std::set<std::string_view> allowed_keys(Scenario s) {
  std::set<std::string_view> keys{"scenario", "seeds", "output"};
  auto add = [&](std::initializer_list<std::string_view> more) { keys.insert(more.begin(), more.end()); };
  switch (s) {
    case Scenario::EntropyScan:
    case Scenario::RegularGrowth:
    case Scenario::CapacityTransition:
    case Scenario::RateVsEta:
      add({"N", "K", "eta", "n0", "coupling", "nq", "nq_min", "nq_max", "phi0", "theta0"});
      break;
    case Scenario::ClassicalAutocorr:
      add({"K", "particles", "L_max", "P0", "diffusion_steps", "diffusion_particles"});
      break;
    case Scenario::Forgetfulness:
      add({"N", "eta", "coupling", "K_transmit", "K_idle", "L", "omega0", "starts", "refinements", "phi0",
           "theta0"});
      break;
  }
  return keys;
}

void apply_key(ExperimentConfig& c, std::string_view key, std::string_view value) {
  auto as_int = [](std::string_view k, std::string_view v) { return parse_number<int>(k, v); };
  auto as_real = [](std::string_view k, std::string_view v) { return parse_real(k, v); };
  if (key == "scenario") {
    if (parse_scenario(value) != c.scenario) bad_field(key, "does not match the requested scenario");
  } else if (key == "seeds") {
    c.seeds = parse_seed_list(value);
  } else if (key == "output") {
    c.output = std::string(value);
  } else if (key == "N") {
    c.N = parse_list<int>(key, value, as_int);
  } else if (key == "K") {
    c.K = parse_list<double>(key, value, as_real);
  } else if (key == "eta") {
    c.eta = parse_list<double>(key, value, as_real);
  } else if (key == "n0") {
    c.n0 = parse_list<int>(key, value, as_int);
  } else if (key == "coupling") {
    c.coupling = parse_list<Coupling>(key, value, [](std::string_view, std::string_view v) { return parse_coupling(v); });
  } else if (key == "nq") {
    c.nq_min = c.nq_max = as_int(key, value);
  } else if (key == "nq_min") {
    c.nq_min = as_int(key, value);
  } else if (key == "nq_max") {
    c.nq_max = as_int(key, value);
  } else if (key == "phi0") {
    c.phi0 = as_real(key, value);
  } else if (key == "theta0") {
    c.theta0 = as_real(key, value);
  } else if (key == "L") {
    c.L = parse_list<int>(key, value, as_int);
  } else if (key == "K_transmit") {
    c.K_transmit = parse_list<double>(key, value, as_real);
  } else if (key == "K_idle") {
    c.K_idle = as_real(key, value);
  } else if (key == "omega0") {
    c.omega0 = parse_list<memory::InitialEnvironment>(key, value, parse_omega0);
  } else if (key == "starts") {
    c.starts = as_int(key, value);
  } else if (key == "refinements") {
    c.refinements = as_int(key, value);
  } else if (key == "particles") {
    c.particles = parse_number<std::size_t>(key, value);
  } else if (key == "L_max") {
    c.L_max = as_int(key, value);
  } else if (key == "P0") {
    c.P0 = as_real(key, value);
  } else if (key == "diffusion_steps") {
    c.diffusion_steps = as_int(key, value);
  } else if (key == "diffusion_particles") {
    c.diffusion_particles = parse_number<std::size_t>(key, value);
  } else {
    bad_field(key, "unknown key");
  }
}

// ---- scenario runners -----------------------------------------------------

std::string fmt_int(long long v) { return std::to_string(v); }
std::string fmt_seed(std::uint64_t v) { return std::to_string(v); }

struct ChannelTask {
  int N;
  double K;
  double eta;
  int n0;
  Coupling coupling;
  std::uint64_t seed;
};

// Cartesian product in declaration order, seed fastest.
std::vector<ChannelTask> channel_tasks(const ExperimentConfig& c, bool coupling_outermost) {
  std::vector<ChannelTask> tasks;
  auto emit = [&](Coupling cp, int N) {
    for (double K : c.K)
      for (double eta : c.eta)
        for (int n0 : c.n0)
          for (auto seed : c.seeds) tasks.push_back({N, K, eta, n0, cp, seed});
  };
  if (coupling_outermost) {
    for (auto cp : c.coupling)
      for (int N : c.N) emit(cp, N);
  } else {
    for (int N : c.N)
      for (auto cp : c.coupling) emit(cp, N);
  }
  return tasks;
}

ChannelConfig channel_config(const ExperimentConfig& c, const ChannelTask& t) {
  ChannelConfig cc;
  cc.spec = make_spec(t.N, c.phi0, c.theta0);
  cc.K = t.K;
  cc.eta = t.eta;
  cc.n0 = t.n0;
  cc.nq = c.nq_max;
  cc.coupling = t.coupling;
  return cc;
}

std::vector<int> recorded_lengths(const ExperimentConfig& c) {
  std::vector<int> out;
  for (int q = c.nq_min; q <= c.nq_max; ++q) out.push_back(q);
  return out;
}

Table entropy_table(const ExperimentConfig& c, int threads, bool regular_layout) {
  const auto tasks = channel_tasks(c, false);
  const auto lengths = recorded_lengths(c);
  std::vector<std::vector<double>> results(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const ChannelConfig cc = channel_config(c, tasks[i]);
    results[i] = entropy_exchange_growth(cc, haar_random_state(cc.spec, tasks[i].seed), lengths);
  });

  Table t;
  if (regular_layout) {
    t.header = {"K", "N", "eta", "n0", "coupling", "Nq", "log2_Nq", "seed", "S_e", "R"};
  } else {
    t.header = {"N", "K", "eta", "n0", "coupling", "Nq", "seed", "S_e", "R"};
  }
  // Rows ordered by parameter tuple, then Nq, then seed.
  const std::size_t per_group = c.seeds.size();
  for (std::size_t g = 0; g < tasks.size() / per_group; ++g) {
    for (std::size_t k = 0; k < lengths.size(); ++k) {
      for (std::size_t s = 0; s < per_group; ++s) {
        const auto& task = tasks[g * per_group + s];
        const int nq = lengths[k];
        const double se = results[g * per_group + s][k];
        std::vector<std::string> row;
        if (regular_layout) {
          row = {format_number(task.K), fmt_int(task.N), format_number(task.eta), fmt_int(task.n0),
                 std::string(to_string(task.coupling)), fmt_int(nq), format_number(std::log2(nq)),
                 fmt_seed(task.seed), format_number(se), format_number(se / nq)};
        } else {
          row = {fmt_int(task.N), format_number(task.K), format_number(task.eta), fmt_int(task.n0),
                 std::string(to_string(task.coupling)), fmt_int(nq), fmt_seed(task.seed),
                 format_number(se), format_number(se / nq)};
        }
        t.rows.push_back(std::move(row));
      }
    }
  }
  return t;
}

Table regular_growth_table(const ExperimentConfig& c, int threads) {
  // K outermost so each K is one contiguous block of the CSV.
  ExperimentConfig reordered = c;
  Table all;
  for (double K : c.K) {
    reordered.K = {K};
    Table part = entropy_table(reordered, threads, true);
    if (all.header.empty()) all.header = part.header;
    for (auto& r : part.rows) all.rows.push_back(std::move(r));
  }
  return all;
}

Table rate_table(const ExperimentConfig& c, int threads) {
  const auto tasks = channel_tasks(c, true);
  struct Out {
    double se;
    double gamma;
  };
  std::vector<Out> results(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    ChannelConfig cc = channel_config(c, tasks[i]);
    const EnvState omega0 = haar_random_state(cc.spec, tasks[i].seed);
    const double se = entropy_exchange_growth(cc, omega0).back();
    ChannelConfig single = cc;
    single.nq = 1;
    const double gamma = tasks[i].eta > 0.0 ? fidelity_decay_rate(single, omega0) : 0.0;
    results[i] = {se, gamma};
  });
  Table t;
  t.header = {"coupling", "N", "K", "n0", "Nq", "eta", "seed", "S_e", "R", "gamma"};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    t.rows.push_back({std::string(to_string(task.coupling)), fmt_int(task.N), format_number(task.K),
                      fmt_int(task.n0), fmt_int(c.nq_max), format_number(task.eta), fmt_seed(task.seed),
                      format_number(results[i].se), format_number(results[i].se / c.nq_max),
                      format_number(results[i].gamma)});
  }
  return t;
}

Table capacity_table(const ExperimentConfig& c, int threads) {
  std::vector<ChannelTask> tasks;
  for (int N : c.N)
    for (auto cp : c.coupling)
      for (double eta : c.eta)
        for (double K : c.K)
          for (int n0 : c.n0)
            for (auto seed : c.seeds) tasks.push_back({N, K, eta, n0, cp, seed});
  std::vector<double> se(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const ChannelConfig cc = channel_config(c, tasks[i]);
    se[i] = entropy_exchange_growth(cc, haar_random_state(cc.spec, tasks[i].seed)).back();
  });
  Table t;
  t.header = {"N", "coupling", "eta", "K", "n0", "Nq", "seed", "S_e", "R", "Q", "chaotic"};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    const double rate = std::clamp(se[i] / c.nq_max, 0.0, 1.0);
    t.rows.push_back({fmt_int(task.N), std::string(to_string(task.coupling)), format_number(task.eta),
                      format_number(task.K), fmt_int(task.n0), fmt_int(c.nq_max), fmt_seed(task.seed),
                      format_number(se[i]), format_number(rate), format_number(capacity_estimate(rate)),
                      is_chaotic(task.K) ? "1" : "0"});
  }
  return t;
}

Table classical_table(const ExperimentConfig& c, int threads) {
  struct Task {
    double K;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double K : c.K)
    for (auto seed : c.seeds) tasks.push_back({K, seed});
  struct Out {
    classical::Autocorrelation ac;
    double diffusion = 0.0;
  };
  std::vector<Out> results(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const auto ens = classical::make_ensemble(c.particles, tasks[i].K, c.P0, tasks[i].seed);
    results[i].ac = classical::autocorrelation(ens, c.L_max);
    if (tasks[i].K >= 0.0) {
      results[i].diffusion =
          classical::diffusion_coefficient(tasks[i].K, c.diffusion_steps, c.diffusion_particles, tasks[i].seed, c.P0);
    }
  });
  Table t;
  t.header = {"K", "seed", "L", "C", "C_norm", "D"};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& r = results[i];
    // Diffusion is a cylinder diagnostic for K >= 0 only; blank otherwise.
    const std::string d = tasks[i].K >= 0.0 ? format_number(r.diffusion) : "";
    for (int L = 0; L <= c.L_max; ++L) {
      t.rows.push_back({format_number(tasks[i].K), fmt_seed(tasks[i].seed), fmt_int(L),
                        format_number(r.ac.C[static_cast<std::size_t>(L)]),
                        format_number(r.ac.normalized[static_cast<std::size_t>(L)]), d});
    }
  }
  return t;
}

Table forgetfulness_table(const ExperimentConfig& c, int threads) {
  struct Task {
    memory::InitialEnvironment omega0;
    double K_transmit;
    int N;
    double eta;
    Coupling coupling;
    int L;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& w : c.omega0)
    for (double kt : c.K_transmit)
      for (int N : c.N)
        for (double eta : c.eta)
          for (auto cp : c.coupling)
            for (int L : c.L)
              for (auto seed : c.seeds) tasks.push_back({w, kt, N, eta, cp, L, seed});
  std::vector<memory::TraceDistanceMaximum> results(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const auto& task = tasks[i];
    memory::BlockProtocol p;
    p.spec = make_spec(task.N, c.phi0, c.theta0);
    p.L = task.L;
    p.K_transmit = task.K_transmit;
    p.K_idle = c.K_idle;
    p.eta = task.eta;
    p.coupling = task.coupling;
    p.omega0 = task.omega0;
    if (p.omega0.kind == memory::InitialEnvironment::Kind::Haar) p.omega0.seed = task.seed;
    memory::OptimizerBudget b;
    b.starts = c.starts;
    b.refinements = c.refinements;
    b.seed = task.seed;
    results[i] = memory::maximize_trace_distance(p, b);
  });
  Table t;
  t.header = {"omega0", "K_transmit", "K_idle", "N", "eta", "coupling", "L", "seed",
              "max_trace_distance", "sqrt_hbar", "phase_sensitivity"};
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    const double sqrt_hbar = std::sqrt(2.0 * std::numbers::pi / task.N);
    t.rows.push_back({omega0_text(task.omega0), format_number(task.K_transmit), format_number(c.K_idle),
                      fmt_int(task.N), format_number(task.eta), std::string(to_string(task.coupling)),
                      fmt_int(task.L), fmt_seed(task.seed), format_number(results[i].value),
                      format_number(sqrt_hbar), format_number(results[i].phase_sensitivity)});
  }
  return t;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::EntropyScan: return "entropy-scan";
    case Scenario::RateVsEta: return "rate-vs-eta";
    case Scenario::ClassicalAutocorr: return "classical-autocorr";
    case Scenario::Forgetfulness: return "forgetfulness";
    case Scenario::RegularGrowth: return "regular-growth";
    case Scenario::CapacityTransition: return "capacity-transition";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view text) {
  for (auto s : {Scenario::EntropyScan, Scenario::RateVsEta, Scenario::ClassicalAutocorr, Scenario::Forgetfulness,
                 Scenario::RegularGrowth, Scenario::CapacityTransition}) {
    if (text == to_string(s)) return s;
  }
  throw ValidationError("unknown scenario '" + std::string(text) + "'");
}

ExperimentConfig default_config(Scenario s) {
  ExperimentConfig c;
  c.scenario = s;
  c.K = {kSqrt2};
  c.eta = {0.3};
  c.n0 = {1};
  c.coupling = {Coupling::KickedQuadratic};
  c.N = {1024};
  switch (s) {
    case Scenario::EntropyScan:
      c.N = {256, 512, 1024, 2048, 4096};
      c.nq_min = 1;
      c.nq_max = 16;
      break;
    case Scenario::RateVsEta:
      c.eta = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
      c.coupling = {Coupling::KickedQuadratic, Coupling::ContinuousSinP};
      c.nq_min = c.nq_max = 8;
      break;
    case Scenario::ClassicalAutocorr:
      c.K = {kSqrt2, -kSqrt2};
      break;
    case Scenario::Forgetfulness:
      c.K_transmit = {1.43, -1.64};
      c.K_idle = kSqrt2;
      c.L = {0, 1, 2, 3, 5, 10, 15, 20};
      c.omega0 = {memory::InitialEnvironment::haar(0), memory::InitialEnvironment::momentum(0)};
      break;
    case Scenario::RegularGrowth:
      c.N = {4096};
      c.K = {-1.8, -2.3, -2.8};
      c.nq_min = 2;
      c.nq_max = 64;
      break;
    case Scenario::CapacityTransition:
      c.K = {-6.0, -5.0, -4.5, -4.0, -3.0, -2.0, -1.0, -0.5, 0.5, 1.0, kSqrt2, 2.0, 3.0};
      c.nq_min = c.nq_max = 32;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) bad_field("seeds", "seed list is empty");
  if (output.empty()) bad_field("output", "output directory is empty");
  auto nonempty = [](std::string_view key, bool empty) {
    if (empty) bad_field(key, "list is empty");
  };
  const bool quantum = scenario != Scenario::ClassicalAutocorr;
  if (quantum) {
    nonempty("N", N.empty());
    for (int n : N)
      if (n < 2) bad_field("N", "dimension must be >= 2");
    nonempty("eta", eta.empty());
    for (double e : eta)
      if (!(e >= 0.0) || !std::isfinite(e)) bad_field("eta", "coupling must be finite and >= 0");
    nonempty("coupling", coupling.empty());
  }
  if (scenario == Scenario::Forgetfulness) {
    nonempty("K_transmit", K_transmit.empty());
    nonempty("L", L.empty());
    for (int l : L)
      if (l < 0) bad_field("L", "idle uses must be >= 0");
    nonempty("omega0", omega0.empty());
    for (const auto& w : omega0) {
      if (w.kind == memory::InitialEnvironment::Kind::MomentumEigenstate) {
        for (int n : N)
          if (w.index < -n / 2 || w.index > n / 2 - 1) bad_field("omega0", "momentum index outside the torus");
      }
    }
    if (starts < 1) bad_field("starts", "must be >= 1");
    if (refinements < 0) bad_field("refinements", "must be >= 0");
    if (!std::isfinite(K_idle)) bad_field("K_idle", "must be finite");
    return;
  }
  nonempty("K", K.empty());
  for (double k : K)
    if (!std::isfinite(k)) bad_field("K", "must be finite");
  if (scenario == Scenario::ClassicalAutocorr) {
    if (particles == 0) bad_field("particles", "must be > 0");
    if (L_max < 0) bad_field("L_max", "must be >= 0");
    if (diffusion_steps < 10) bad_field("diffusion_steps", "diffusion regression needs >= 10 steps");
    if (diffusion_particles == 0) bad_field("diffusion_particles", "must be > 0");
    return;
  }
  nonempty("n0", n0.empty());
  for (int n : n0)
    if (n < 1) bad_field("n0", "must be >= 1");
  if (nq_min < 1) bad_field("nq_min", "must be >= 1");
  if (nq_max < nq_min) bad_field("nq_max", "must be >= nq_min");
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  if (trim(text).empty()) return seeds;
  for (auto item : split(text, ',')) {
    // a..b ranges are inclusive
    const auto dots = item.find("..");
    if (dots != std::string_view::npos) {
      const auto lo = parse_number<std::uint64_t>("seeds", trim(item.substr(0, dots)));
      const auto hi = parse_number<std::uint64_t>("seeds", trim(item.substr(dots + 2)));
      if (hi < lo) bad_field("seeds", "descending range");
      for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_number<std::uint64_t>("seeds", item));
    }
  }
  return seeds;
}

ExperimentConfig parse_config(std::string_view text, Scenario s) {
  ExperimentConfig c = default_config(s);
  const auto allowed = allowed_keys(s);
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!allowed.contains(key)) {
      bad_field(key, "unknown key for scenario " + std::string(to_string(s)));
    }
    apply_key(c, key, value);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, Scenario s) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), s);
}

// Round-trip precision, unlike the CSV formatting.
static std::string exact_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  auto real = [](double v) { return exact_number(v); };
  auto integer = [](auto v) { return std::to_string(v); };
  out << "scenario = " << to_string(c.scenario) << "\n";
  const auto keys = allowed_keys(c.scenario);
  auto has = [&](std::string_view k) { return keys.contains(k); };
  if (has("N")) out << "N = " << join(c.N, integer) << "\n";
  if (has("K")) out << "K = " << join(c.K, real) << "\n";
  if (has("eta")) out << "eta = " << join(c.eta, real) << "\n";
  if (has("n0")) out << "n0 = " << join(c.n0, integer) << "\n";
  if (has("coupling")) out << "coupling = " << join(c.coupling, [](Coupling cp) { return std::string(to_string(cp)); }) << "\n";
  if (has("nq_min")) out << "nq_min = " << c.nq_min << "\nnq_max = " << c.nq_max << "\n";
  if (has("phi0")) out << "phi0 = " << exact_number(c.phi0) << "\ntheta0 = " << exact_number(c.theta0) << "\n";
  if (has("K_transmit")) {
    out << "K_transmit = " << join(c.K_transmit, real) << "\n";
    out << "K_idle = " << exact_number(c.K_idle) << "\n";
    out << "L = " << join(c.L, integer) << "\n";
    out << "omega0 = " << join(c.omega0, omega0_text) << "\n";
    out << "starts = " << c.starts << "\nrefinements = " << c.refinements << "\n";
  }
  if (has("particles")) {
    out << "particles = " << c.particles << "\nL_max = " << c.L_max << "\nP0 = " << exact_number(c.P0) << "\n";
    out << "diffusion_steps = " << c.diffusion_steps << "\ndiffusion_particles = " << c.diffusion_particles << "\n";
  }
  out << "seeds = " << join(c.seeds, integer) << "\n";
  out << "output = " << c.output << "\n";
  return out.str();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["scenario"] = std::string(to_string(c.scenario));
  j["config_text"] = to_text(c);
  j["N"] = c.N;
  j["K"] = c.K;
  j["eta"] = c.eta;
  j["n0"] = c.n0;
  std::vector<std::string> couplings;
  for (auto cp : c.coupling) couplings.emplace_back(to_string(cp));
  j["coupling"] = couplings;
  j["nq_min"] = c.nq_min;
  j["nq_max"] = c.nq_max;
  j["phi0"] = c.phi0;
  j["theta0"] = c.theta0;
  j["L"] = c.L;
  j["K_transmit"] = c.K_transmit;
  j["K_idle"] = c.K_idle;
  std::vector<std::string> envs;
  for (const auto& w : c.omega0) envs.push_back(omega0_text(w));
  j["omega0"] = envs;
  j["starts"] = c.starts;
  j["refinements"] = c.refinements;
  j["particles"] = c.particles;
  j["L_max"] = c.L_max;
  j["P0"] = c.P0;
  j["diffusion_steps"] = c.diffusion_steps;
  j["diffusion_particles"] = c.diffusion_particles;
  j["seeds"] = c.seeds;
  j["output"] = c.output;
  return j;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0"; // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

Table compute(const ExperimentConfig& config, int threads) {
  config.validate();
  switch (config.scenario) {
    case Scenario::EntropyScan: return entropy_table(config, threads, false);
    case Scenario::RateVsEta: return rate_table(config, threads);
    case Scenario::ClassicalAutocorr: return classical_table(config, threads);
    case Scenario::Forgetfulness: return forgetfulness_table(config, threads);
    case Scenario::RegularGrowth: return regular_growth_table(config, threads);
    case Scenario::CapacityTransition: return capacity_table(config, threads);
  }
  throw ValidationError("unknown scenario");
}

RunResult run(const ExperimentConfig& config, int threads) {
  config.validate();
  const std::filesystem::path dir(config.output);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create output directory " + dir.string() + ": " + ec.message());

  const auto started = std::chrono::steady_clock::now();
  const Table table = compute(config, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  RunResult result;
  const std::string stem(to_string(config.scenario));
  result.csv_path = dir / (stem + ".csv");
  result.json_path = dir / (stem + ".json");
  result.rows = table.rows.size();
  result.wall_seconds = wall;

  {
    std::ofstream csv(result.csv_path, std::ios::binary);
    csv << table.to_csv();
    if (!csv) throw ResourceError("failed writing " + result.csv_path.string());
  }
  nlohmann::json sidecar;
  sidecar["config"] = to_json(config);
  sidecar["seeds"] = config.seeds;
  sidecar["software"] = {{"name", "sawchan"}, {"version", std::string(kVersion)}};
  sidecar["threads"] = threads;
  sidecar["wall_clock_seconds"] = wall;
  sidecar["finished_at"] = iso_timestamp();
  sidecar["rows"] = result.rows;
  sidecar["csv"] = result.csv_path.filename().string();
  {
    std::ofstream js(result.json_path, std::ios::binary);
    js << sidecar.dump(2) << "\n";
    if (!js) throw ResourceError("failed writing " + result.json_path.string());
  }
  return result;
}

// ---- summaries ------------------------------------------------------------

Table parse_csv(std::string_view text) {
  Table t;
  int line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    for (auto cell : split(line, ',')) cells.emplace_back(cell);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ValidationError("malformed CSV: line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ValidationError("malformed CSV: no header");
  return t;
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read CSV " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

Summary summarize(const Table& table) {
  static const std::set<std::string> measurements{"S_e", "R", "Q", "gamma", "C", "C_norm", "D",
                                                   "max_trace_distance", "phase_sensitivity", "y"};
  static const std::set<std::string> derived{"log2_Nq", "seed", "sqrt_hbar", "chaotic"};
  static const std::vector<std::string> sweep_columns{"Nq", "L", "eta", "x"};

  auto column = [&](const std::string& name) -> int {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    return it == table.header.end() ? -1 : static_cast<int>(it - table.header.begin());
  };

  std::string x_name;
  for (const auto& s : sweep_columns) {
    if (column(s) >= 0) {
      x_name = s;
      break;
    }
  }
  // rate-vs-eta tables sweep eta; a single-Nq table has no Nq sweep.
  if (x_name == "Nq" && column("eta") >= 0 && column("Nq") >= 0) {
    std::set<std::string> nqs;
    for (const auto& r : table.rows) nqs.insert(r[static_cast<std::size_t>(column("Nq"))]);
    if (nqs.size() == 1 && column("log2_Nq") < 0) x_name = "eta";
  }
  const int x_col = x_name.empty() ? -1 : column(x_name);

  std::vector<int> value_cols, param_cols;
  for (int i = 0; i < static_cast<int>(table.header.size()); ++i) {
    const auto& h = table.header[static_cast<std::size_t>(i)];
    if (i == x_col || derived.contains(h)) continue;
    (measurements.contains(h) ? value_cols : param_cols).push_back(i);
  }
  if (value_cols.empty()) throw ValidationError("CSV has no measurement columns");

  auto to_double = [](const std::string& s, const std::string& col) {
    if (s.empty()) return std::nan("");
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("malformed CSV: non-numeric value '" + s + "' in column " + col);
    }
  };

  // group key -> x -> column -> samples (insertion order preserved via vectors)
  std::vector<std::vector<std::string>> group_keys;
  std::vector<std::map<double, std::vector<std::vector<double>>>> group_data;
  for (const auto& row : table.rows) {
    std::vector<std::string> key;
    for (int c : param_cols) key.push_back(row[static_cast<std::size_t>(c)]);
    auto it = std::find(group_keys.begin(), group_keys.end(), key);
    std::size_t g = static_cast<std::size_t>(it - group_keys.begin());
    if (it == group_keys.end()) {
      group_keys.push_back(key);
      group_data.emplace_back();
    }
    const double x = x_col >= 0 ? to_double(row[static_cast<std::size_t>(x_col)], x_name) : 0.0;
    auto& slot = group_data[g][x];
    slot.resize(value_cols.size());
    for (std::size_t v = 0; v < value_cols.size(); ++v) {
      const auto& name = table.header[static_cast<std::size_t>(value_cols[v])];
      const double val = to_double(row[static_cast<std::size_t>(value_cols[v])], name);
      if (!std::isnan(val)) slot[v].push_back(val);
    }
  }

  Summary summary;
  const int k_col = column("K");
  for (std::size_t g = 0; g < group_keys.size(); ++g) {
    SummaryGroup group;
    group.x_column = x_name;
    for (std::size_t p = 0; p < param_cols.size(); ++p) {
      group.params.emplace_back(table.header[static_cast<std::size_t>(param_cols[p])], group_keys[g][p]);
    }
    std::vector<double> xs, ys;
    for (const auto& [x, cols] : group_data[g]) {
      SummaryPoint point;
      point.x = x;
      for (std::size_t v = 0; v < value_cols.size(); ++v) {
        Moments m;
        m.n = cols[v].size();
        if (m.n > 0) {
          m.mean = mean(cols[v]);
          m.stderr_ = standard_error(cols[v]);
        }
        const auto& name = table.header[static_cast<std::size_t>(value_cols[v])];
        point.values.emplace_back(name, m);
        if ((name == "S_e" || name == "y") && m.n > 0) {
          xs.push_back(x);
          ys.push_back(m.mean);
        }
      }
      group.points.push_back(std::move(point));
    }
    if ((x_name == "Nq" || x_name == "x") && xs.size() >= 2) {
      bool chaotic = true;
      if (k_col >= 0) {
        for (std::size_t p = 0; p < param_cols.size(); ++p) {
          if (param_cols[p] == k_col) chaotic = is_chaotic(to_double(group_keys[g][p], "K"));
        }
      }
      group.has_fit = true;
      if (chaotic || x_name == "x") {
        group.fit_kind = "linear";
        group.fit = linear_fit(xs, ys);
      } else {
        group.fit_kind = "log2";
        std::vector<double> lx;
        for (double x : xs) lx.push_back(std::log2(x));
        group.fit = linear_fit(lx, ys);
      }
    }
    summary.groups.push_back(std::move(group));
  }
  return summary;
}

Summary summarize(const std::filesystem::path& csv_path) { return summarize(read_csv(csv_path)); }

nlohmann::json Summary::to_json() const {
  nlohmann::json out;
  out["groups"] = nlohmann::json::array();
  for (const auto& g : groups) {
    nlohmann::json jg;
    jg["params"] = nlohmann::json::object();
    for (const auto& [k, v] : g.params) jg["params"][k] = v;
    jg["x"] = g.x_column;
    jg["points"] = nlohmann::json::array();
    for (const auto& p : g.points) {
      nlohmann::json jp;
      jp["x"] = p.x;
      for (const auto& [name, m] : p.values) jp[name] = {{"n", m.n}, {"mean", m.mean}, {"stderr", m.stderr_}};
      jg["points"].push_back(jp);
    }
    if (g.has_fit) {
      jg["fit"] = {{"kind", g.fit_kind},
                   {"slope", g.fit.slope},
                   {"intercept", g.fit.intercept},
                   {"slope_stderr", g.fit.slope_stderr},
                   {"r_squared", g.fit.r_squared},
                   {"residual_rms", g.fit.residual_rms}};
    }
    out["groups"].push_back(jg);
  }
  return out;
}

} // namespace sawchan::expt
