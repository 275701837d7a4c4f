#include "sawchan.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "sawchan/channel.hpp"
#include "sawchan/classical.hpp"
#include "sawchan/errors.hpp"
#include "sawchan/experiment.hpp"
#include "sawchan/memory.hpp"
#include "sawchan/torus.hpp"

struct sawchan_torus {
  sawchan::TorusSpec spec;
};

struct sawchan_state {
  sawchan::EnvState state;
};

struct sawchan_experiment {
  sawchan::expt::Scenario scenario;
  sawchan::expt::ExperimentConfig config;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::string> output;
  std::string csv_path;
};

namespace {

thread_local std::string last_error;

sawchan_status fail(sawchan_status code, std::string message) {
  last_error = std::move(message);
  return code;
}

template <class Fn>
sawchan_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return SAWCHAN_OK;
  } catch (const sawchan::ValidationError& e) {
    return fail(SAWCHAN_INVALID, e.what());
  } catch (const sawchan::ResourceError& e) {
    return fail(SAWCHAN_RESOURCE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SAWCHAN_RESOURCE, "out of memory");
  } catch (const sawchan::NumericalError& e) {
    return fail(SAWCHAN_NUMERICAL, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(SAWCHAN_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(SAWCHAN_INTERNAL, e.what());
  } catch (...) {
    return fail(SAWCHAN_INTERNAL, "unknown exception");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw sawchan::ValidationError(what);
}

sawchan::Coupling coupling_of(sawchan_coupling c) {
  switch (c) {
    case SAWCHAN_COUPLING_KICKED: return sawchan::Coupling::KickedQuadratic;
    case SAWCHAN_COUPLING_SINP: return sawchan::Coupling::ContinuousSinP;
  }
  throw sawchan::ValidationError("unknown coupling");
}

sawchan::ChannelConfig channel_of(const sawchan_state* omega0, const sawchan_channel_params* p) {
  require(omega0 != nullptr && p != nullptr, "null argument");
  sawchan::ChannelConfig c;
  c.spec = omega0->state.spec;
  c.K = p->K;
  c.eta = p->eta;
  c.n0 = p->n0;
  c.nq = p->nq;
  c.coupling = coupling_of(p->coupling);
  c.validate();
  return c;
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

} // namespace

extern "C" {

const char* sawchan_version(void) {
  static const std::string v(sawchan::expt::kVersion);
  return v.c_str();
}

const char* sawchan_last_error(void) { return last_error.c_str(); }

sawchan_status sawchan_torus_create(int N, double phi0, double theta0, sawchan_torus** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    const double p = std::isnan(phi0) ? sawchan::kDefaultShift : phi0;
    const double t = std::isnan(theta0) ? sawchan::kDefaultShift : theta0;
    *out = new sawchan_torus{sawchan::make_spec(N, p, t)};
  });
}

void sawchan_torus_destroy(sawchan_torus* torus) { delete torus; }

int sawchan_torus_dimension(const sawchan_torus* torus) { return torus ? torus->spec.N : 0; }

double sawchan_torus_hbar(const sawchan_torus* torus) { return torus ? torus->spec.hbar_eff() : 0.0; }

sawchan_status sawchan_state_momentum(const sawchan_torus* torus, int index, sawchan_state** out) {
  return guarded([&] {
    require(torus != nullptr && out != nullptr, "null argument");
    *out = new sawchan_state{sawchan::momentum_eigenstate(torus->spec, index)};
  });
}

sawchan_status sawchan_state_haar(const sawchan_torus* torus, uint64_t seed, sawchan_state** out) {
  return guarded([&] {
    require(torus != nullptr && out != nullptr, "null argument");
    *out = new sawchan_state{sawchan::haar_random_state(torus->spec, seed)};
  });
}

void sawchan_state_destroy(sawchan_state* state) { delete state; }

sawchan_status sawchan_state_step(sawchan_state* state, double k_eff) {
  return guarded([&] {
    require(state != nullptr, "null state");
    state->state = sawchan::floquet_step(state->state, k_eff);
  });
}

double sawchan_state_norm(const sawchan_state* state) { return state ? std::sqrt(state->state.norm_squared()) : 0.0; }

sawchan_status sawchan_state_amplitudes(const sawchan_state* state, double* out, size_t out_len) {
  return guarded([&] {
    require(state != nullptr && out != nullptr, "null argument");
    const auto& a = state->state.amplitudes;
    require(out_len >= 2 * static_cast<size_t>(a.size()), "output buffer too small");
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      out[2 * i] = a[i].real();
      out[2 * i + 1] = a[i].imag();
    }
  });
}

sawchan_status sawchan_state_overlap(const sawchan_state* a, const sawchan_state* b, double* re, double* im) {
  return guarded([&] {
    require(a && b && re && im, "null argument");
    require(a->state.spec == b->state.spec, "states live on different tori");
    const auto v = sawchan::overlap(a->state, b->state);
    *re = v.real();
    *im = v.imag();
  });
}

sawchan_status sawchan_entropy_growth(const sawchan_state* omega0, const sawchan_channel_params* params, double* out,
                                      size_t out_len) {
  return guarded([&] {
    const auto c = channel_of(omega0, params);
    require(out != nullptr && out_len >= static_cast<size_t>(c.nq), "output buffer too small");
    const auto s = sawchan::entropy_exchange_growth(c, omega0->state);
    std::copy(s.begin(), s.end(), out);
  });
}

sawchan_status sawchan_gram_matrix(const sawchan_state* omega0, const sawchan_channel_params* params, double* out,
                                   size_t out_len) {
  return guarded([&] {
    const auto c = channel_of(omega0, params);
    require(c.nq <= 14, "gram matrix export limited to nq <= 14");
    const size_t d = size_t{1} << c.nq;
    require(out != nullptr && out_len >= 2 * d * d, "output buffer too small");
    const auto g = sawchan::gram_matrix(sawchan::propagate_branches(c, omega0->state));
    for (size_t j = 0; j < d; ++j) {
      for (size_t l = 0; l < d; ++l) {
        const auto v = g.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l));
        out[2 * (j * d + l)] = v.real();
        out[2 * (j * d + l) + 1] = v.imag();
      }
    }
  });
}

sawchan_status sawchan_fidelity_decay_rate(const sawchan_state* omega0, const sawchan_channel_params* params,
                                           double* out) {
  return guarded([&] {
    const auto c = channel_of(omega0, params);
    require(out != nullptr, "null output");
    *out = sawchan::fidelity_decay_rate(c, omega0->state);
  });
}

sawchan_status sawchan_stochastic_rate(double g, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = sawchan::stochastic_rate(g);
  });
}

sawchan_status sawchan_capacity_estimate(double rate, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    *out = sawchan::capacity_estimate(rate);
  });
}

sawchan_status sawchan_max_trace_distance(const sawchan_block_params* params, double* out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    sawchan::memory::BlockProtocol p;
    p.spec = sawchan::make_spec(params->N);
    p.L = params->L;
    p.K_transmit = params->K_transmit;
    p.K_idle = params->K_idle;
    p.eta = params->eta;
    p.coupling = coupling_of(params->coupling);
    p.omega0 = params->omega0_momentum ? sawchan::memory::InitialEnvironment::momentum(params->omega0_index)
                                       : sawchan::memory::InitialEnvironment::haar(params->seed);
    sawchan::memory::OptimizerBudget b;
    b.starts = params->starts;
    b.refinements = params->refinements;
    b.seed = params->seed;
    *out = sawchan::memory::maximize_trace_distance(p, b).value;
  });
}

sawchan_status sawchan_autocorrelation(double K, size_t particles, double P0, uint64_t seed, int L_max, double* out,
                                       size_t out_len) {
  return guarded([&] {
    require(particles > 0, "particles must be > 0");
    require(L_max >= 0, "L_max must be >= 0");
    require(out != nullptr && out_len >= static_cast<size_t>(L_max) + 1, "output buffer too small");
    const auto ens = sawchan::classical::make_ensemble(particles, K, P0, seed);
    const auto ac = sawchan::classical::autocorrelation(ens, L_max);
    std::copy(ac.C.begin(), ac.C.end(), out);
  });
}

sawchan_status sawchan_diffusion(double K, int steps, size_t particles, uint64_t seed, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output");
    require(particles > 0, "particles must be > 0");
    *out = sawchan::classical::diffusion_coefficient(K, steps, particles, seed);
  });
}

sawchan_status sawchan_experiment_create(const char* scenario, sawchan_experiment** out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr, "null argument");
    const auto s = sawchan::expt::parse_scenario(scenario);
    *out = new sawchan_experiment{s, sawchan::expt::default_config(s), std::nullopt, std::nullopt, {}};
  });
}

sawchan_status sawchan_experiment_load_file(sawchan_experiment* exp, const char* path) {
  return guarded([&] {
    require(exp != nullptr && path != nullptr, "null argument");
    exp->config = sawchan::expt::load_config(path, exp->scenario);
  });
}

sawchan_status sawchan_experiment_load_text(sawchan_experiment* exp, const char* text) {
  return guarded([&] {
    require(exp != nullptr && text != nullptr, "null argument");
    exp->config = sawchan::expt::parse_config(text, exp->scenario);
  });
}

sawchan_status sawchan_experiment_set_seeds(sawchan_experiment* exp, const char* seeds) {
  return guarded([&] {
    require(exp != nullptr && seeds != nullptr, "null argument");
    exp->seeds = sawchan::expt::parse_seed_list(seeds);
  });
}

sawchan_status sawchan_experiment_set_output(sawchan_experiment* exp, const char* directory) {
  return guarded([&] {
    require(exp != nullptr && directory != nullptr, "null argument");
    exp->output = directory;
  });
}

sawchan_status sawchan_experiment_run(sawchan_experiment* exp, int threads) {
  return guarded([&] {
    require(exp != nullptr, "null experiment");
    require(threads >= 1, "threads must be >= 1");
    // explicit setters override the config file regardless of call order
    auto config = exp->config;
    if (exp->seeds) config.seeds = *exp->seeds;
    if (exp->output) config.output = *exp->output;
    exp->csv_path = sawchan::expt::run(config, threads).csv_path.string();
  });
}

const char* sawchan_experiment_csv_path(const sawchan_experiment* exp) {
  return exp ? exp->csv_path.c_str() : "";
}

void sawchan_experiment_destroy(sawchan_experiment* exp) { delete exp; }

sawchan_status sawchan_summarize(const char* csv_path, char** json_out) {
  return guarded([&] {
    require(csv_path != nullptr && json_out != nullptr, "null argument");
    *json_out = duplicate(sawchan::expt::summarize(std::filesystem::path(csv_path)).to_json().dump(2));
  });
}

void sawchan_free_string(char* s) { std::free(s); }

} // extern "C"
