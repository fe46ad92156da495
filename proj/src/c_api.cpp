#include "lfp/lfp.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "lfp/experiments.hpp"

struct lfp_dataset {
  lfp::Dataset value;
};

struct lfp_lattice {
  lfp::LatticePtr value;
};

struct lfp_solution {
  lfp::LfpSolution value;
  lfp::LfpCoefficients c;
};

struct lfp_net {
  lfp::TwoLayerNet value;
};

namespace {

thread_local std::string last_error;

lfp_status status_of(lfp::ErrorCode code) {
  return static_cast<lfp_status>(static_cast<int>(code) + 1);
}

template <class F>
lfp_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return LFP_OK;
  } catch (const lfp::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const lfp::Json::exception& e) {
    last_error = e.what();
    return LFP_ERR_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return LFP_ERR_SIZE_LIMIT;
  } catch (const std::exception& e) {
    last_error = e.what();
    return LFP_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return LFP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  lfp::require(p != nullptr, lfp::ErrorCode::invalid_argument,
               std::string(what) + " must not be null");
}

lfp::Matrix points_from(const double* x, std::size_t n, std::size_t dim) {
  need(x, "points");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      x, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
}

void copy_out(const lfp::Vector& v, double* out) {
  std::memcpy(out, v.data(), static_cast<std::size_t>(v.size()) * sizeof(double));
}

}  // namespace

extern "C" {

const char* lfp_version(void) { return lfp::version_string(); }

const char* lfp_status_string(lfp_status status) {
  if (status == LFP_OK) return "ok";
  if (status == LFP_ERR_INTERNAL) return "internal";
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(lfp::ErrorCode::invalid_spec)) return "unknown";
  return lfp::to_string(static_cast<lfp::ErrorCode>(code));
}

const char* lfp_last_error(void) { return last_error.c_str(); }

lfp_status lfp_dataset_create(const double* x, const double* y, size_t samples, size_t dim,
                              lfp_dataset** out) {
  return guarded([&] {
    need(out, "out");
    need(y, "targets");
    lfp::require(samples > 0 && dim > 0, lfp::ErrorCode::invalid_argument,
                 "dataset needs at least one sample and one dimension");
    lfp::Matrix inputs = points_from(x, samples, dim);
    lfp::Vector targets = Eigen::Map<const lfp::Vector>(y, static_cast<Eigen::Index>(samples));
    *out = new lfp_dataset{lfp::Dataset(std::move(inputs), std::move(targets))};
  });
}

lfp_status lfp_dataset_read_csv(const char* path, lfp_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new lfp_dataset{lfp::read_dataset_csv(path)};
  });
}

lfp_status lfp_dataset_write_csv(const lfp_dataset* data, const char* path) {
  return guarded([&] {
    need(data, "dataset");
    need(path, "path");
    lfp::write_dataset_csv(path, data->value);
  });
}

lfp_status lfp_dataset_shape(const lfp_dataset* data, size_t* samples, size_t* dim) {
  return guarded([&] {
    need(data, "dataset");
    if (samples) *samples = data->value.size();
    if (dim) *dim = data->value.dim();
  });
}

lfp_status lfp_dataset_hash(const lfp_dataset* data, char hash[17]) {
  return guarded([&] {
    need(data, "dataset");
    need(hash, "hash");
    const std::string h = lfp::dataset_hash(data->value);
    std::memcpy(hash, h.c_str(), 17);
  });
}

void lfp_dataset_free(lfp_dataset* data) { delete data; }

lfp_status lfp_lattice_create(int dim, double period, int half_width, lfp_lattice** out) {
  return guarded([&] {
    need(out, "out");
    *out = new lfp_lattice{lfp::build_lattice(dim, period, half_width)};
  });
}

lfp_status lfp_lattice_size(const lfp_lattice* lattice, size_t* size) {
  return guarded([&] {
    need(lattice, "lattice");
    need(size, "size");
    *size = lattice->value->size();
  });
}

void lfp_lattice_free(lfp_lattice* lattice) { delete lattice; }

lfp_status lfp_coefficient(const double* xi, int dim, double a, double b, double* out) {
  return guarded([&] {
    need(xi, "xi");
    need(out, "out");
    const lfp::LfpCoefficients c = lfp::make_coefficients(a, b, dim);
    *out = lfp::lfp_coefficient({xi, static_cast<std::size_t>(dim)}, c);
  });
}

lfp_status lfp_solve(const lfp_dataset* data, const lfp_lattice* lattice, double a, double b,
                     double epsilon, lfp_intercept intercept, lfp_solution** out) {
  return guarded([&] {
    need(data, "dataset");
    need(lattice, "lattice");
    need(out, "out");
    lfp::require(intercept == LFP_INTERCEPT_NONE || intercept == LFP_INTERCEPT_UNPENALIZED,
                 lfp::ErrorCode::invalid_argument, "unknown intercept mode");
    const lfp::LfpCoefficients c = lfp::make_coefficients(a, b, lattice->value->dim());
    lfp::RidgeConfig cfg;
    cfg.epsilon = epsilon;
    cfg.intercept = intercept == LFP_INTERCEPT_NONE ? lfp::InterceptMode::none
                                                    : lfp::InterceptMode::unpenalized;
    *out = new lfp_solution{lfp::solve_lfp(data->value, lattice->value, c, cfg), c};
  });
}

lfp_status lfp_solution_predict(const lfp_solution* sol, const double* x, size_t points,
                                double* out) {
  return guarded([&] {
    need(sol, "solution");
    need(out, "out");
    if (points == 0) return;
    const auto dim = static_cast<std::size_t>(sol->value.spectral.lattice().dim());
    copy_out(lfp::evaluate_spectrum(sol->value.spectral, points_from(x, points, dim)), out);
  });
}

lfp_status lfp_solution_fp_norm(const lfp_solution* sol, double* out) {
  return guarded([&] {
    need(sol, "solution");
    need(out, "out");
    *out = lfp::fp_norm(sol->value.spectral, sol->c);
  });
}

lfp_status lfp_solution_intercept(const lfp_solution* sol, double* out) {
  return guarded([&] {
    need(sol, "solution");
    need(out, "out");
    *out = sol->value.spectral.intercept();
  });
}

lfp_status lfp_solution_spectrum(const lfp_solution* sol, double* re, double* im, size_t count) {
  return guarded([&] {
    need(sol, "solution");
    need(re, "re");
    need(im, "im");
    const auto half = sol->value.spectral.positive_half();
    lfp::require(count == half.size(), lfp::ErrorCode::dimension_mismatch,
                 "spectrum buffer must hold " + std::to_string(half.size()) + " entries");
    for (std::size_t h = 0; h < half.size(); ++h) {
      re[h] = half[h].real();
      im[h] = half[h].imag();
    }
  });
}

void lfp_solution_free(lfp_solution* sol) { delete sol; }

lfp_status lfp_net_init(size_t dim, size_t width, lfp_net_form form, const char* preset,
                        uint64_t seed, int asi, lfp_net** out) {
  return guarded([&] {
    need(out, "out");
    lfp::require(form == LFP_FORM_GENERAL || form == LFP_FORM_ONE_D,
                 lfp::ErrorCode::invalid_argument, "unknown network form");
    lfp::InitSpec spec = preset ? lfp::preset_init(preset) : lfp::InitSpec{};
    spec.seed = seed;
    lfp::TwoLayerNet net = lfp::init_net(
        dim, width, spec, form == LFP_FORM_ONE_D ? lfp::NetForm::one_d : lfp::NetForm::general);
    if (asi) net = lfp::apply_asi(net);
    *out = new lfp_net{std::move(net)};
  });
}

lfp_status lfp_net_width(const lfp_net* net, size_t* width) {
  return guarded([&] {
    need(net, "net");
    need(width, "width");
    *width = net->value.width();
  });
}

lfp_status lfp_net_forward(const lfp_net* net, const double* x, size_t points, double* out) {
  return guarded([&] {
    need(net, "net");
    need(out, "out");
    if (points == 0) return;
    copy_out(lfp::forward(net->value, points_from(x, points, net->value.dim)), out);
  });
}

lfp_status lfp_net_coefficients(const lfp_net* net, double* a, double* b) {
  return guarded([&] {
    need(net, "net");
    const lfp::LfpCoefficients c = lfp::coefficients_from_init(net->value);
    if (a) *a = c.a;
    if (b) *b = c.b;
  });
}

lfp_status lfp_net_loss(const lfp_net* net, const lfp_dataset* data, double* out) {
  return guarded([&] {
    need(net, "net");
    need(data, "dataset");
    need(out, "out");
    *out = lfp::loss(net->value, data->value);
  });
}

void lfp_net_free(lfp_net* net) { delete net; }

lfp_status lfp_run(const char* command, const char* config_json, const char* out_dir,
                   size_t workers, char** report_json) {
  return guarded([&] {
    need(command, "command");
    need(report_json, "report_json");
    *report_json = nullptr;
    lfp::Json config = lfp::Json::object();
    if (config_json && *config_json) {
      try {
        config = lfp::Json::parse(config_json);
      } catch (const lfp::Json::parse_error& e) {
        lfp::fail(lfp::ErrorCode::config, std::string("configuration is not valid JSON: ") +
                                              e.what());
      }
    }
    lfp::RunContext ctx;
    if (out_dir && *out_dir) ctx.out_dir = out_dir;
    ctx.workers = workers == 0 ? 1 : workers;
    const std::string text = lfp::run_command(command, config, ctx).dump(2);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    lfp::require(buf != nullptr, lfp::ErrorCode::size_limit, "out of memory");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *report_json = buf;
  });
}

void lfp_string_free(char* text) { std::free(text); }

}  // extern "C"
