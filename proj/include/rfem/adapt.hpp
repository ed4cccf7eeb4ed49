#pragma once

#include <limits>
#include <string>

#include "rfem/estimator.hpp"
#include "rfem/system.hpp"

namespace rfem {

/// Maximum strategy: marked = {e : eta_e >= theta * max eta}. theta in (0,1];
/// throws on an empty indicator list.
std::vector<int> mark_maximum(const std::vector<double>& eta, double theta);

struct AdaptRecord {
  int iter = 0;
  int ndof = 0;         ///< discontinuous trial dofs
  int interior_cg = 0;  ///< interior conforming dofs
  double error = std::numeric_limits<double>::quiet_NaN();  ///< energy error, if exact known
  double estimator = 0.0;
  double effectivity = std::numeric_limits<double>::quiet_NaN();
  int nelems = 0;
};

struct AdaptOptions {
  int r = 0;
  int s = 1;
  double theta = 0.25;
  int max_iter = 25;
  double tol = 1e-3;  ///< stop once the total estimator drops below this
};

struct AdaptOutcome {
  std::vector<AdaptRecord> records;
  Mesh mesh;            ///< mesh the loop stopped on
  std::string failure;  ///< solver error message when the run ended early
};

/// Solve, estimate, record; stop when the estimator is below tol or the
/// iteration budget runs out, otherwise mark (maximum strategy on
/// sqrt(eta^2 + stab + eta_A^2)) and refine. A solver failure ends the loop
/// and is reported in `failure` together with the records gathered so far.
AdaptOutcome adapt_loop(const Mesh& initial, const ProblemSpec& prob, const StabSpec& stab,
                        const AdaptOptions& opt);

/// CSV export "iter,ndof,error,estimator,effectivity,nelems".
void write_adapt_csv(const std::vector<AdaptRecord>& records, const std::string& path);

}  // namespace rfem
