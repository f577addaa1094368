#include "merton/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

#include "merton/errors.hpp"

namespace merton {

namespace {

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const noexcept {
    gsl_integration_workspace_free(w);
  }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;

// GSL aborts on error by default; we inspect status codes instead.
void disable_gsl_abort() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

gsl_integration_workspace* workspace_for(std::size_t size) {
  thread_local Workspace cached;
  thread_local std::size_t cached_size = 0;
  if (!cached || cached_size < size) {
    cached.reset(gsl_integration_workspace_alloc(size));
    if (!cached) throw NumericError("integrate: cannot allocate workspace");
    cached_size = size;
  }
  return cached.get();
}

struct Trampoline {
  const std::function<double(double)>* f;
  std::exception_ptr error;

  static double call(double x, void* self) {
    auto* t = static_cast<Trampoline*>(self);
    if (t->error) return 0.0;
    try {
      return (*t->f)(x);
    } catch (...) {
      t->error = std::current_exception();
      return 0.0;
    }
  }
};

}  // namespace

void QuadratureSpec::validate() const {
  if (!(abs_tolerance > 0.0)) throw ConfigError("QuadratureSpec: abs_tolerance must be > 0");
  if (max_subdivisions < 1) throw ConfigError("QuadratureSpec: max_subdivisions must be >= 1");
}

QuadratureResult integrate_with_error(const std::function<double(double)>& f,
                                      double lower, double upper,
                                      const QuadratureSpec& spec) {
  spec.validate();
  if (std::isnan(lower) || std::isnan(upper)) throw DomainError("integrate: NaN bound");
  if (lower == upper) return {0.0, 0.0};
  if (lower > upper) {
    auto r = integrate_with_error(f, upper, lower, spec);
    return {-r.value, r.error_bound};
  }

  disable_gsl_abort();
  gsl_integration_workspace* ws = workspace_for(spec.max_subdivisions);

  Trampoline tramp{&f, nullptr};
  gsl_function gf{&Trampoline::call, &tramp};
  double value = 0.0;
  double abserr = 0.0;
  const double epsabs = spec.abs_tolerance;
  const std::size_t limit = spec.max_subdivisions;

  int status;
  const bool lo_inf = std::isinf(lower);
  const bool hi_inf = std::isinf(upper);
  if (lo_inf && hi_inf) {
    status = gsl_integration_qagi(&gf, epsabs, 0.0, limit, ws, &value, &abserr);
  } else if (lo_inf) {
    status = gsl_integration_qagil(&gf, upper, epsabs, 0.0, limit, ws, &value, &abserr);
  } else if (hi_inf) {
    status = gsl_integration_qagiu(&gf, lower, epsabs, 0.0, limit, ws, &value, &abserr);
  } else {
    status = gsl_integration_qags(&gf, lower, upper, epsabs, 0.0, limit, ws, &value, &abserr);
  }

  if (tramp.error) std::rethrow_exception(tramp.error);
  if (status == GSL_SUCCESS) return {value, abserr};
  if (status == GSL_EMAXITER) {
    throw QuadratureError("integrate: subdivision budget exhausted", value, abserr);
  }
  // Round-off and extrapolation diagnostics are accepted when the error
  // bound still honours the requested tolerance.
  if (abserr <= epsabs) return {value, abserr};
  throw QuadratureError(std::string("integrate: ") + gsl_strerror(status), value, abserr);
}

double integrate(const std::function<double(double)>& f, double lower, double upper,
                 const QuadratureSpec& spec) {
  return integrate_with_error(f, lower, upper, spec).value;
}

}  // namespace merton
