#include "rfem/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

double corner_angle(const Vec2& x) {
  double t = std::atan2(x.y(), x.x());
  if (t < 0.0) t += 2.0 * kPi;
  return t;
}

std::string describe(const char* name, const char* method, int r, int s, const StabSpec& stab,
                     const char* mesh_family) {
  char buf[320];
  const double p = 2.0 * stab.alpha - 1.0;
  if (stab.kind == StabKind::DgInteriorPenalty)
    std::snprintf(buf, sizeof buf,
                  "%s method=%s r=%d alpha=%g c_sigma=%g theta=%g sigma=c_sigma*|A|*h^%g mesh=%s",
                  name, method, r, stab.alpha, stab.c_sigma, stab.theta, p, mesh_family);
  else
    std::snprintf(buf, sizeof buf,
                  "%s method=%s r=%d s=%d alpha=%g c_sigma=%g sigma=c_sigma*|A|*h^%g mesh=%s",
                  name, method, r, s, stab.alpha, stab.c_sigma, p, mesh_family);
  return buf;
}

struct LevelErrors {
  double l2 = 0.0;
  double h1 = 0.0;
  double dg = std::numeric_limits<double>::quiet_NaN();
  int ndof = 0;
  double h = 0.0;
};

LevelErrors rfem_level(const Mesh& mesh, const ProblemSpec& prob, const StabSpec& stab, int r,
                       int s, bool want_dg_error) {
  const FeSpace dg = build_space(mesh, SpaceKind::DG, r);
  const FeSpace cg = build_space(mesh, SpaceKind::CG, s);
  const RecoveryOp op = build_recovery(dg, cg);
  const FeFunction uh{&dg, solve(build_rfem_system(op, prob, stab))};
  const FeFunction ru = recover(op, uh);
  const ErrorNorms err = error_norms(ru, prob.exact, prob.exact_grad);
  LevelErrors out;
  out.l2 = err.l2;
  out.h1 = err.h1_semi;
  if (want_dg_error) {
    const std::vector<double> sigma = facet_sigma(mesh, stab, diffusion_scale(mesh, prob.A));
    out.dg = dg_norm_error(uh, prob.exact_grad, sigma);
  }
  out.ndof = dg.ndof;
  out.h = mesh.max_diameter();
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

SparsitySummary summarize_matrix(const char* label, const SpMat& A) {
  SparsitySummary s;
  s.label = label;
  s.size = static_cast<int>(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      if (std::abs(it.value()) > 1e-14) {
        ++s.nnz;
        s.bandwidth = std::max(s.bandwidth, std::abs(static_cast<int>(it.row() - it.col())));
      }
  return s;
}

}  // namespace

ProblemSpec sinsin_problem() {
  ProblemSpec p;
  p.A = [](const Vec2&) { return Eigen::Matrix2d::Identity().eval(); };
  p.f = [](const Vec2& x) {
    return 2.0 * kPi * kPi * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
  };
  p.exact = [](const Vec2& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
  p.exact_grad = [](const Vec2& x) {
    return Vec2(kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
  };
  return p;
}

ProblemSpec lshape_problem() {
  ProblemSpec p;
  p.A = [](const Vec2&) { return Eigen::Matrix2d::Identity().eval(); };
  p.exact = [](const Vec2& x) {
    const double phi =
        std::pow(x.norm(), 2.0 / 3.0) * std::sin(2.0 * corner_angle(x) / 3.0);
    return phi * (x.x() * x.x() - 1.0) * (x.y() * x.y() - 1.0);
  };
  p.exact_grad = [](const Vec2& x) {
    const double r = x.norm();
    if (r < 1e-14) return Vec2(0.0, 0.0);
    const double t = corner_angle(x);
    const double phi = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * t / 3.0);
    const Vec2 gphi = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) *
                      Vec2(-std::sin(t / 3.0), std::cos(t / 3.0));
    const double psi = (x.x() * x.x() - 1.0) * (x.y() * x.y() - 1.0);
    const Vec2 gpsi(2.0 * x.x() * (x.y() * x.y() - 1.0), 2.0 * x.y() * (x.x() * x.x() - 1.0));
    return (psi * gphi + phi * gpsi).eval();
  };
  // the radial factor is harmonic, so f = -(2 grad phi . grad psi + phi lap psi)
  p.f = [](const Vec2& x) {
    const double r = x.norm();
    if (r < 1e-14) return 0.0;
    const double t = corner_angle(x);
    const double phi = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * t / 3.0);
    const Vec2 gphi = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) *
                      Vec2(-std::sin(t / 3.0), std::cos(t / 3.0));
    const Vec2 gpsi(2.0 * x.x() * (x.y() * x.y() - 1.0), 2.0 * x.y() * (x.x() * x.x() - 1.0));
    const double lap_psi = 2.0 * (x.x() * x.x() - 1.0) + 2.0 * (x.y() * x.y() - 1.0);
    return -(2.0 * gphi.dot(gpsi) + phi * lap_psi);
  };
  return p;
}

ProblemSpec convection_problem_a(double eps) {
  ProblemSpec p = sinsin_problem();
  p.eps = eps;
  p.A = [eps](const Vec2&) { return (eps * Eigen::Matrix2d::Identity()).eval(); };
  p.w = [](const Vec2& x) {
    return Vec2((2.0 * x.y() - 1.0) * (1.0 - x.x() * x.x()),
                2.0 * x.x() * x.y() * (x.y() - 1.0));
  };
  const auto grad = p.exact_grad;
  const auto wind = p.w;
  p.f = [eps, grad, wind](const Vec2& x) {
    const double lap = -2.0 * kPi * kPi * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    return -eps * lap + wind(x).dot(grad(x));
  };
  return p;
}

ProblemSpec convection_problem_b(double eps) {
  ProblemSpec p;
  p.eps = eps;
  p.A = [eps](const Vec2&) { return (eps * Eigen::Matrix2d::Identity()).eval(); };
  p.w = [](const Vec2&) { return Vec2(1.0, 1.0); };
  p.f = [](const Vec2&) { return 1.0; };
  return p;
}

std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size()) throw std::invalid_argument("eoc: length mismatch");
  std::vector<double> out;
  for (size_t i = 0; i + 1 < errors.size(); ++i)
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  return out;
}

void fill_eoc(ConvergenceTable& table) {
  for (size_t i = 1; i < table.rows.size(); ++i) {
    const double dh = std::log(table.rows[i - 1].h / table.rows[i].h);
    table.rows[i].l2_eoc = std::log(table.rows[i - 1].l2_error / table.rows[i].l2_error) / dh;
    table.rows[i].h1_eoc = std::log(table.rows[i - 1].h1_error / table.rows[i].h1_error) / dh;
  }
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: length mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size(); ++i)
    if (std::isfinite(x[i]) && std::isfinite(y[i]) && x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  const size_t m = lx.size();
  if (m < 2) throw std::invalid_argument("fit_loglog: needs at least two positive points");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < m; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double cov = 0.0, var = 0.0;
  for (size_t i = 0; i < m; ++i) {
    cov += (lx[i] - mx) * (ly[i] - my);
    var += (lx[i] - mx) * (lx[i] - mx);
  }
  if (var <= 0.0) throw std::invalid_argument("fit_loglog: degenerate abscissae");
  LineFit fit;
  fit.slope = cov / var;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

void write_table_csv(const ConvergenceTable& table, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("write_table_csv: cannot open " + path);
  std::fprintf(out, "# %s\n", table.provenance.c_str());
  std::fprintf(out, "level,h,ndof,L2_error,H1_error,dG_error,L2_EOC,H1_EOC,kappa\n");
  for (const ConvergenceRow& r : table.rows)
    std::fprintf(out, "%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.level, r.h, r.ndof,
                 r.l2_error, r.h1_error, r.dg_error, r.l2_eoc, r.h1_eoc, r.kappa);
  std::fclose(out);
}

void write_table_svg(const ConvergenceTable& table, const std::string& path) {
  struct Series {
    const char* label;
    const char* color;
    std::vector<double> x, y;
  };
  Series series[3] = {{"L2 error", "#1f77b4", {}, {}},
                      {"H1 error", "#d62728", {}, {}},
                      {"dG error", "#2ca02c", {}, {}}};
  for (const ConvergenceRow& r : table.rows) {
    if (r.ndof <= 0) continue;
    const double vals[3] = {r.l2_error, r.h1_error, r.dg_error};
    for (int k = 0; k < 3; ++k)
      if (std::isfinite(vals[k]) && vals[k] > 0.0) {
        series[k].x.push_back(r.ndof);
        series[k].y.push_back(vals[k]);
      }
  }

  const double W = 640, H = 480, ml = 70, mr = 150, mt = 44, mb = 56;
  double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
  for (const Series& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      lx0 = std::min(lx0, std::log10(s.x[i]));
      lx1 = std::max(lx1, std::log10(s.x[i]));
      ly0 = std::min(ly0, std::log10(s.y[i]));
      ly1 = std::max(ly1, std::log10(s.y[i]));
    }
  if (lx0 > lx1) {
    lx0 = 0.0;
    lx1 = 1.0;
    ly0 = 0.0;
    ly1 = 1.0;
  }
  if (lx1 - lx0 < 1e-9) {
    lx0 -= 0.5;
    lx1 += 0.5;
  }
  // room below the data for the slope triangles
  ly0 -= 0.45 + 0.3 * 3;
  if (ly1 - ly0 < 1e-9) {
    ly0 -= 0.5;
    ly1 += 0.5;
  }
  const double padx = 0.05 * (lx1 - lx0), pady = 0.06 * (ly1 - ly0);
  lx0 -= padx;
  lx1 += padx;
  ly0 -= pady;
  ly1 += pady;

  const auto px = [&](double lx) { return ml + (lx - lx0) / (lx1 - lx0) * (W - ml - mr); };
  const auto py = [&](double ly) { return H - mb - (ly - ly0) / (ly1 - ly0) * (H - mt - mb); };

  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("write_table_svg: cannot open " + path);
  std::fprintf(out,
               "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
               "viewBox=\"0 0 %g %g\" font-family=\"sans-serif\">\n",
               W, H, W, H);
  std::fprintf(out, "<rect width=\"%g\" height=\"%g\" fill=\"white\"/>\n", W, H);
  const std::string title = xml_escape(table.name + "  " + table.provenance);
  std::fprintf(out, "<text x=\"%g\" y=\"20\" font-size=\"12\" fill=\"#222\">%s</text>\n", ml,
               title.c_str());
  std::fprintf(out,
               "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" "
               "stroke=\"#444\"/>\n",
               ml, mt, W - ml - mr, H - mt - mb);

  for (int p = static_cast<int>(std::ceil(lx0)); p <= static_cast<int>(std::floor(lx1)); ++p) {
    const double xx = px(p);
    std::fprintf(out, "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#444\"/>\n", xx,
                 H - mb, xx, H - mb + 4);
    std::fprintf(out,
                 "<text x=\"%.2f\" y=\"%g\" font-size=\"11\" text-anchor=\"middle\" "
                 "fill=\"#222\">1e%d</text>\n",
                 xx, H - mb + 18, p);
  }
  for (int p = static_cast<int>(std::ceil(ly0)); p <= static_cast<int>(std::floor(ly1)); ++p) {
    const double yy = py(p);
    std::fprintf(out, "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#444\"/>\n",
                 ml - 4, yy, ml, yy);
    std::fprintf(out,
                 "<text x=\"%g\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\" "
                 "fill=\"#222\">1e%d</text>\n",
                 ml - 7, yy + 4, p);
  }
  std::fprintf(out,
               "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\" "
               "fill=\"#222\">degrees of freedom</text>\n",
               ml + (W - ml - mr) / 2, H - 16);
  std::fprintf(out,
               "<text transform=\"translate(18,%g) rotate(-90)\" font-size=\"12\" "
               "text-anchor=\"middle\" fill=\"#222\">error</text>\n",
               mt + (H - mt - mb) / 2);

  int drawn = 0;
  for (const Series& s : series) {
    if (s.x.empty()) continue;
    std::fprintf(out, "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" points=\"",
                 s.color);
    for (size_t i = 0; i < s.x.size(); ++i)
      std::fprintf(out, "%s%.2f,%.2f", i ? " " : "", px(std::log10(s.x[i])),
                   py(std::log10(s.y[i])));
    std::fprintf(out, "\"/>\n");
    for (size_t i = 0; i < s.x.size(); ++i)
      std::fprintf(out, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                   px(std::log10(s.x[i])), py(std::log10(s.y[i])), s.color);
    std::fprintf(out,
                 "<text x=\"%g\" y=\"%g\" font-size=\"12\" fill=\"%s\">%s</text>\n",
                 W - mr + 12, mt + 16.0 + 18.0 * drawn, s.color, s.label);

    if (s.x.size() >= 2) {
      const LineFit fit = fit_loglog(s.x, s.y);
      const size_t nlast = s.x.size() - 1;
      const double la = std::log10(s.x[nlast - 1]);
      const double lb = std::log10(s.x[nlast]);
      const double base = std::log10(s.y[nlast - 1]) - 0.45 - 0.3 * drawn;
      const double tip = base + fit.slope * (lb - la);
      std::fprintf(out,
                   "<polygon fill=\"none\" stroke=\"%s\" points=\"%.2f,%.2f %.2f,%.2f "
                   "%.2f,%.2f\"/>\n",
                   s.color, px(la), py(base), px(lb), py(base), px(lb), py(tip));
      std::fprintf(out,
                   "<text x=\"%.2f\" y=\"%.2f\" font-size=\"10\" fill=\"%s\">%.2f</text>\n",
                   px(lb) + 4, (py(base) + py(tip)) / 2, s.color, fit.slope);
    }
    ++drawn;
  }
  if (drawn == 0)
    std::fprintf(out, "<text x=\"%g\" y=\"%g\" font-size=\"12\" fill=\"#222\">no data</text>\n",
                 ml + 10, mt + 24.0);
  std::fprintf(out, "</svg>\n");
  std::fclose(out);
}

void emit(const ConvergenceTable& table, const std::string& format, const std::string& path) {
  if (format == "csv")
    write_table_csv(table, path);
  else if (format == "svg")
    write_table_svg(table, path);
  else
    throw std::invalid_argument("emit: unknown format " + format);
}

std::string format_table(const ConvergenceTable& table) {
  std::string out = "# " + table.provenance + "\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%5s %10s %8s %12s %12s %12s %7s %7s %10s\n", "level", "h",
                "ndof", "L2_error", "H1_error", "dG_error", "L2_EOC", "H1_EOC", "kappa");
  out += buf;
  for (const ConvergenceRow& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%5d %10.4g %8d %12.5g %12.5g %12.5g %7.3f %7.3f %10.4g\n",
                  r.level, r.h, r.ndof, r.l2_error, r.h1_error, r.dg_error, r.l2_eoc, r.h1_eoc,
                  r.kappa);
    out += buf;
  }
  return out;
}

ConvergenceTable run_test1(int r, int s, double alpha, double c_sigma,
                           const std::vector<int>& levels) {
  const ProblemSpec prob = sinsin_problem();
  StabSpec stab;
  stab.alpha = alpha;
  stab.c_sigma = c_sigma;
  ConvergenceTable t;
  t.name = "test1";
  t.provenance = describe("test1", "RFEM", r, s, stab, "crisscross");
  for (int n : levels) {
    const Mesh mesh = make_crisscross(n);
    const LevelErrors le = rfem_level(mesh, prob, stab, r, s, false);
    ConvergenceRow row;
    row.level = n;
    row.h = le.h;
    row.ndof = le.ndof;
    row.l2_error = le.l2;
    row.h1_error = le.h1;
    t.rows.push_back(row);
  }
  fill_eoc(t);
  return t;
}

DgCompareTables run_test1_dg_compare(const std::vector<double>& c_sigmas,
                                     const std::vector<int>& levels) {
  const ProblemSpec prob = sinsin_problem();
  DgCompareTables out;
  for (double c : c_sigmas) {
    StabSpec stab;
    stab.alpha = 1.0;
    stab.c_sigma = c;
    ConvergenceTable t;
    t.name = "test1-dg rfem";
    t.provenance = describe("test1-dg", "RFEM", 0, 1, stab, "crisscross");
    for (int n : levels) {
      const Mesh mesh = make_crisscross(n);
      const LevelErrors le = rfem_level(mesh, prob, stab, 0, 1, true);
      ConvergenceRow row;
      row.level = n;
      row.h = le.h;
      row.ndof = le.ndof;
      row.l2_error = le.l2;
      row.h1_error = le.h1;
      row.dg_error = le.dg;
      t.rows.push_back(row);
    }
    fill_eoc(t);
    out.rfem.push_back(std::move(t));
  }

  StabSpec ip;
  ip.kind = StabKind::DgInteriorPenalty;
  ip.alpha = 0.0;
  ip.c_sigma = 10.0;
  ip.theta = 1.0;
  ConvergenceTable t;
  t.name = "test1-dg ipdg";
  t.provenance = describe("test1-dg", "IPDG", 1, 1, ip, "crisscross");
  for (int n : levels) {
    const Mesh mesh = make_crisscross(n);
    const FeSpace dg = build_space(mesh, SpaceKind::DG, 1);
    const FeFunction uh{&dg, solve(build_ipdg_system(dg, prob, ip))};
    const ErrorNorms err = error_norms(uh, prob.exact, prob.exact_grad);
    const std::vector<double> sigma = facet_sigma(mesh, ip, diffusion_scale(mesh, prob.A));
    ConvergenceRow row;
    row.level = n;
    row.h = mesh.max_diameter();
    row.ndof = dg.ndof;
    row.l2_error = err.l2;
    row.h1_error = err.h1_semi;
    row.dg_error = dg_norm_error(uh, prob.exact_grad, sigma);
    t.rows.push_back(row);
  }
  fill_eoc(t);
  out.ipdg = std::move(t);
  return out;
}

ConvergenceTable run_test2(const std::vector<int>& levels) {
  const ProblemSpec prob = lshape_problem();
  StabSpec stab;
  ConvergenceTable t;
  t.name = "test2";
  t.provenance = describe("test2", "RFEM", 0, 1, stab, "lshape");
  for (int n : levels) {
    const Mesh mesh = make_lshape(n);
    const LevelErrors le = rfem_level(mesh, prob, stab, 0, 1, false);
    ConvergenceRow row;
    row.level = n;
    row.h = le.h;
    row.ndof = le.ndof;
    row.l2_error = le.l2;
    row.h1_error = le.h1;
    t.rows.push_back(row);
  }
  fill_eoc(t);
  return t;
}

AdaptOutcome run_test3(double theta, int max_iter) {
  AdaptOptions opt;
  opt.theta = theta;
  opt.max_iter = max_iter;
  opt.tol = 0.0;
  StabSpec stab;
  return adapt_loop(make_lshape(2), lshape_problem(), stab, opt);
}

ConvergenceTable run_test4_convergence(double eps, const std::vector<int>& levels) {
  const ProblemSpec prob = convection_problem_a(eps);
  StabSpec stab;
  ConvergenceTable t;
  t.name = "test4a";
  t.provenance = describe("test4a", "RFEM", 0, 1, stab, "crisscross") +
                 " eps=" + std::to_string(eps);
  for (int n : levels) {
    const Mesh mesh = make_crisscross(n);
    const LevelErrors le = rfem_level(mesh, prob, stab, 0, 1, false);
    ConvergenceRow row;
    row.level = n;
    row.h = le.h;
    row.ndof = le.ndof;
    row.l2_error = le.l2;
    row.h1_error = le.h1;
    t.rows.push_back(row);
  }
  fill_eoc(t);
  return t;
}

StabilityReport run_test4_stability(const std::vector<double>& eps_list, int n) {
  StabilityReport rep;
  rep.n = n;
  const Mesh mesh = make_crisscross(n);
  const FeSpace dg0 = build_space(mesh, SpaceKind::DG, 0);
  const FeSpace cg1 = build_space(mesh, SpaceKind::CG, 1);
  const FeSpace dg1 = build_space(mesh, SpaceKind::DG, 1);
  const RecoveryOp op = build_recovery(dg0, cg1);
  for (double eps : eps_list) {
    const ProblemSpec prob = convection_problem_b(eps);
    StabilityRow row;
    row.eps = eps;
    {
      StabSpec stab;
      const FeFunction uh{&dg0, solve(build_rfem_system(op, prob, stab))};
      const FeFunction ru = recover(op, uh);
      row.rfem_finite = ru.coef.allFinite();
      if (row.rfem_finite) {
        row.rfem_min = ru.coef.minCoeff();
        row.rfem_max = ru.coef.maxCoeff();
        row.rfem_overshoot = std::max(0.0, row.rfem_max - 1.0);
        row.rfem_undershoot = std::max(0.0, -row.rfem_min);
      }
    }
    {
      StabSpec ip;
      ip.kind = StabKind::DgInteriorPenalty;
      ip.alpha = 0.0;
      ip.c_sigma = 10.0;
      ip.theta = 1.0;
      const FeFunction uh{&dg1, solve(build_ipdg_system(dg1, prob, ip))};
      row.dg_finite = uh.coef.allFinite();
      if (row.dg_finite) {
        row.dg_min = uh.coef.minCoeff();
        row.dg_max = uh.coef.maxCoeff();
        row.dg_overshoot = std::max(0.0, row.dg_max - 1.0);
        row.dg_undershoot = std::max(0.0, -row.dg_min);
      }
    }
    rep.rows.push_back(row);
  }
  return rep;
}

void write_stability_csv(const StabilityReport& report, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("write_stability_csv: cannot open " + path);
  std::fprintf(out,
               "# test4b method=RFEM(r=0,s=1,sigma=eps*h) vs IPDG(r=1,sigma=10*eps/h,theta=1) "
               "mesh=crisscross n=%d\n",
               report.n);
  std::fprintf(out,
               "eps,rfem_min,rfem_max,rfem_overshoot,rfem_undershoot,rfem_finite,"
               "dg_min,dg_max,dg_overshoot,dg_undershoot,dg_finite\n");
  for (const StabilityRow& r : report.rows)
    std::fprintf(out, "%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%d\n", r.eps,
                 r.rfem_min, r.rfem_max, r.rfem_overshoot, r.rfem_undershoot,
                 r.rfem_finite ? 1 : 0, r.dg_min, r.dg_max, r.dg_overshoot, r.dg_undershoot,
                 r.dg_finite ? 1 : 0);
  std::fclose(out);
}

std::string format_stability(const StabilityReport& report) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# test4b RFEM(r=0,s=1,sigma=eps*h) vs IPDG(r=1,sigma=10*eps/h) n=%d\n", report.n);
  std::string out = buf;
  std::snprintf(buf, sizeof buf, "%10s %12s %12s %12s %12s %12s %12s\n", "eps", "rfem_min",
                "rfem_max", "rfem_over", "dg_min", "dg_max", "dg_over");
  out += buf;
  for (const StabilityRow& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%10.3g %12.5g %12.5g %12.5g %12.5g %12.5g %12.5g\n", r.eps,
                  r.rfem_min, r.rfem_max, r.rfem_overshoot, r.dg_min, r.dg_max, r.dg_overshoot);
    out += buf;
  }
  return out;
}

ConditionReport run_condition(const std::vector<double>& alphas, const std::vector<int>& levels,
                              double c_sigma, int sparsity_n) {
  const ProblemSpec prob = sinsin_problem();
  ConditionReport rep;
  rep.sparsity_n = sparsity_n;
  for (double alpha : alphas) {
    ConditionSeries ser;
    ser.alpha = alpha;
    for (int n : levels) {
      const Mesh mesh = make_crisscross(n);
      const FeSpace dg = build_space(mesh, SpaceKind::DG, 0);
      const FeSpace cg = build_space(mesh, SpaceKind::CG, 1);
      const RecoveryOp op = build_recovery(dg, cg);
      StabSpec stab;
      stab.alpha = alpha;
      stab.c_sigma = c_sigma;
      const LinearSystem sys = build_rfem_system(op, prob, stab);
      ser.levels.push_back(n);
      ser.ndofs.push_back(static_cast<int>(sys.A.rows()));
      ser.kappa.push_back(condition_estimate(sys.A));
    }
    const std::vector<double> x(ser.ndofs.begin(), ser.ndofs.end());
    ser.fitted_exponent = fit_loglog(x, ser.kappa).slope;
    rep.series.push_back(std::move(ser));
  }

  const Mesh mesh = make_crisscross(sparsity_n);
  const FeSpace dg0 = build_space(mesh, SpaceKind::DG, 0);
  const FeSpace cg1 = build_space(mesh, SpaceKind::CG, 1);
  const FeSpace dg1 = build_space(mesh, SpaceKind::DG, 1);
  const RecoveryOp op = build_recovery(dg0, cg1);
  StabSpec stab;
  stab.c_sigma = c_sigma;
  rep.sparsity.push_back(
      summarize_matrix("recovered system", build_rfem_system(op, prob, stab).A));
  rep.sparsity.push_back(
      summarize_matrix("conforming stiffness", assemble_stiffness(cg1, prob.A)));
  StabSpec ip;
  ip.kind = StabKind::DgInteriorPenalty;
  ip.alpha = 0.0;
  ip.c_sigma = 10.0;
  ip.theta = 1.0;
  rep.sparsity.push_back(
      summarize_matrix("interior-penalty dG", build_ipdg_system(dg1, prob, ip).A));
  return rep;
}

std::string format_condition(const ConditionReport& report) {
  std::string out = "# condition numbers of the recovered system, r=0 s=1, crisscross\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "%7s %6s %8s %14s\n", "alpha", "n", "ndof", "kappa");
  out += buf;
  for (const ConditionSeries& s : report.series) {
    for (size_t i = 0; i < s.kappa.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%7g %6d %8d %14.6g\n", s.alpha, s.levels[i], s.ndofs[i],
                    s.kappa[i]);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "  alpha=%g fitted growth kappa ~ ndof^%.3f\n", s.alpha,
                  s.fitted_exponent);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "# sparsity at n=%d\n", report.sparsity_n);
  out += buf;
  std::snprintf(buf, sizeof buf, "%-24s %8s %10s %10s\n", "matrix", "size", "nnz", "bandwidth");
  out += buf;
  for (const SparsitySummary& s : report.sparsity) {
    std::snprintf(buf, sizeof buf, "%-24s %8d %10lld %10d\n", s.label.c_str(), s.size, s.nnz,
                  s.bandwidth);
    out += buf;
  }
  return out;
}

}  // namespace rfem
