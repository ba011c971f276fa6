// Batch front-end: configure a system, run verification suites, emit
// JSON summaries and CSV detail tables.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <magconn/circlebundle.hpp>
#include <magconn/dynamics.hpp>
#include <magconn/framebundle.hpp>
#include <magconn/magtensor.hpp>
#include <magconn/manifold.hpp>
#include <magconn/reptheory.hpp>
#include <magconn/rng.hpp>
#include <magconn/tomoconst.hpp>

namespace {

using namespace magconn;
using nlohmann::json;
using tomo::Rational;

struct CheckResult {
  std::string name;
  double residual = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double runtimeSeconds = 0.0;

  void add(const std::string& name, double residual, double tol) {
    checks.push_back({name, residual, tol, residual <= tol});
  }
  int passed() const {
    int k = 0;
    for (const auto& c : checks) k += c.pass;
    return k;
  }
  double maxResidual() const {
    double worst = 0.0;
    for (const auto& c : checks) worst = std::max(worst, c.residual);
    return worst;
  }
  bool allPass() const { return passed() == static_cast<int>(checks.size()); }
};

void writeReports(const SuiteReport& rep, const std::string& outDir) {
  std::filesystem::create_directories(outDir);
  json summary = {{"suite", rep.suite},
                  {"checks_total", rep.checks.size()},
                  {"checks_passed", rep.passed()},
                  {"max_residual", rep.maxResidual()},
                  {"runtime_seconds", rep.runtimeSeconds}};
  std::ofstream js(outDir + "/" + rep.suite + ".json");
  js << summary.dump(2) << "\n";

  std::ofstream csv(outDir + "/" + rep.suite + ".csv");
  csv << "check,residual,tolerance,pass\n";
  char buf[128];
  for (const auto& c : rep.checks) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", c.residual, c.tol);
    csv << c.name << "," << buf << "," << (c.pass ? 1 : 0) << "\n";
  }
}

int finish(SuiteReport& rep, double runtime, const std::string& outDir) {
  rep.runtimeSeconds = runtime;
  writeReports(rep, outDir);
  std::printf("[%s] %d/%zu checks passed, max residual %.3e, %.2f s\n", rep.suite.c_str(),
              rep.passed(), rep.checks.size(), rep.maxResidual(), runtime);
  for (const auto& c : rep.checks)
    if (!c.pass)
      std::printf("  FAIL %s: residual %.3e > tol %.3e\n", c.name.c_str(), c.residual, c.tol);
  return rep.allPass() ? 0 : 1;
}

struct SystemOptions {
  std::string name = "conformal-t2";
  double b = 0.5;
  double kahlerC = 0.4;
  double period = 0.0;   // 0 keeps the builtin default of 2 pi
  double fdStep = 0.0;   // 0 keeps the builtin default
  ConformalTorusParams conformal;
};

MagneticSystem makeSystem(const SystemOptions& o) {
  if (o.name == "flat-t2") return flatTorus(2);
  if (o.name == "flat-t3") return flatTorus(3);
  if (o.name == "flat-t4") return flatTorus(4);
  if (o.name == "constant-b-t2") return constantFieldTorus2(o.b);
  if (o.name == "conformal-t2") return conformalTorus2(o.conformal);
  if (o.name == "nonclosed-t3") return nonclosedTorus3();
  if (o.name == "kahler-t4") return kahlerTorus4(o.kahlerC);
  if (o.name == "sphere-s2") return sphereChart(2);
  if (o.name == "sphere-s3") return sphereChart(3);
  if (o.name == "hyperbolic-h2") return hyperbolicChart(2, o.b);
  if (o.name == "hyperbolic-h3") return hyperbolicChart(3, o.b);
  throw CLI::ValidationError("--system", "unknown builtin '" + o.name + "'");
}

MagneticSystem makeConfiguredSystem(const SystemOptions& o) {
  MagneticSystem s = makeSystem(o);
  if (o.period > 0.0 && s.metric.periodic())
    s.metric.period = Eigen::VectorXd::Constant(s.dim(), o.period);
  if (o.fdStep > 0.0) s.metric.fdStep = o.fdStep;
  return s;
}

void addSystemOptions(CLI::App* cmd, SystemOptions& o) {
  cmd->add_option("--system", o.name, "builtin system name")
      ->check(CLI::IsMember({"flat-t2", "flat-t3", "flat-t4", "constant-b-t2", "conformal-t2",
                             "nonclosed-t3", "kahler-t4", "sphere-s2", "sphere-s3", "hyperbolic-h2",
                             "hyperbolic-h3"}));
  cmd->add_option("--b", o.b, "constant field strength for constant-b and hyperbolic systems");
  cmd->add_option("--kahler-c", o.kahlerC, "Kahler multiple");
  cmd->add_option("--phi-c1", o.conformal.c1, "conformal coefficient c1");
  cmd->add_option("--phi-c2", o.conformal.c2, "conformal coefficient c2");
  cmd->add_option("--phi-c3", o.conformal.c3, "conformal coefficient c3");
  cmd->add_option("--b0", o.conformal.b0, "field coefficient b0");
  cmd->add_option("--b1", o.conformal.b1, "field coefficient b1");
  cmd->add_option("--b2", o.conformal.b2, "field coefficient b2");
  cmd->add_option("--period", o.period, "override the torus period");
  cmd->add_option("--fd-step", o.fdStep, "override the metric finite-difference step");
}

double elapsed(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// suites
// ---------------------------------------------------------------------------

int runTensors(const SystemOptions& so, std::uint64_t seed, int samples, const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  auto s = makeConfiguredSystem(so);
  const int n = s.dim();
  Rng rng(seed);
  SuiteReport rep{"tensors"};

  double torsionWorst = 0.0, tangentialWorst = 0.0, secWorst = 0.0, bianchiWorst = 0.0;
  for (int it = 0; it < samples; ++it) {
    auto c = sampleCurvature(s, randomFramePoint(s, rng));
    Eigen::VectorXd x = rng.vector(n), y = rng.vector(n), z = rng.vector(n);
    Eigen::VectorXd viaC = contorsion(c, x) * y - contorsion(c, y) * x;
    torsionWorst = std::max(torsionWorst, (torsion(c, x, y) - viaC).norm());

    Eigen::VectorXd zn = rng.vector(n - 1);
    Eigen::VectorXd zf = Eigen::VectorXd::Zero(n);
    zf.tail(n - 1) = zn;
    Eigen::VectorXd viaCurv =
        curvature(c, zf, Eigen::VectorXd::Unit(n, 0)) * Eigen::VectorXd::Unit(n, 0);
    tangentialWorst =
        std::max(tangentialWorst, (viaCurv.tail(n - 1) - tangentialCurvature(c, zn)).norm());
    zn /= zn.norm();
    zf.tail(n - 1) = zn;
    secWorst = std::max(secWorst, std::abs(secSigma(c, zf, Eigen::VectorXd::Unit(n, 0)) -
                                           tangentialCurvature(c, zn).dot(zn)));
    auto [lhs, rhs] = bianchiPair(c, x, y, z);
    bianchiWorst = std::max(bianchiWorst, (lhs - rhs).norm());
  }
  rep.add("torsion_equals_antisymmetrized_contorsion", torsionWorst, 1e-13);
  rep.add("tangential_equals_curvature_contraction", tangentialWorst, 1e-10);
  rep.add("sec_matches_tangential_quadratic_form", secWorst, 1e-10);
  rep.add("bianchi_lhs_equals_rhs", bianchiWorst, s.metric.dg ? 1e-8 : 1e-6);
  return finish(rep, elapsed(t0), outDir);
}

int runBrackets(const SystemOptions& so, std::uint64_t seed, int points, const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  auto s = makeConfiguredSystem(so);
  const int n = s.dim();
  Rng rng(seed);
  SuiteReport rep{"brackets"};

  double yy = 0.0, yb = 0.0, bb = 0.0, master = 0.0;
  for (int it = 0; it < points; ++it) {
    FramePoint w = randomFramePoint(s, rng);
    Eigen::MatrixXd xi = makeSkew<double>(rng.matrix(n, n));
    Eigen::MatrixXd eta = makeSkew<double>(rng.matrix(n, n));
    Eigen::VectorXd x = rng.vector(n), y = rng.vector(n);
    auto scale = [](const FMVelocity& v) { return std::max(1.0, v.norm()); };

    auto b1 = fdBracket(fundamentalField(xi), fundamentalField(eta), w);
    auto r1 = fundamentalField(Eigen::MatrixXd(xi * eta - eta * xi))(w);
    yy = std::max(yy, (b1 - r1).norm() / scale(r1));

    auto b2 = fdBracket(fundamentalField(xi), standardField(s, x), w);
    auto r2 = standardField(s, Eigen::VectorXd(xi * x))(w);
    yb = std::max(yb, (b2 - r2).norm() / scale(r2));

    auto sample = sampleCurvature(s, w);
    auto b3 = fdBracket(standardField(s, x), standardField(s, y), w);
    auto r3 = fundamentalField(Eigen::MatrixXd(-sample.riemann(x, y)))(w);
    bb = std::max(bb, (b3 - r3).norm() / scale(r3));

    auto b4 = fdBracket(magneticStandardField(s, x), magneticStandardField(s, y), w) * (-1.0);
    auto d = decomposeFMVector(s, w, b4);
    Eigen::VectorXd tau = torsion(sample, x, y);
    Eigen::MatrixXd rs = curvature(sample, x, y);
    double res = std::abs(d.c - tau(0)) + (d.h - tau.tail(n - 1)).norm() + (d.xi - rs).norm();
    master = std::max(master, res / std::max(1.0, std::max(tau.norm(), rs.norm())));
  }
  rep.add("fundamental_fundamental", yy, 1e-5);
  rep.add("fundamental_standard", yb, 1e-5);
  rep.add("standard_standard_vs_riemann", bb, 1e-5);
  rep.add("magnetic_structure_equation", master, 1e-4);
  return finish(rep, elapsed(t0), outDir);
}

void dumpTrajectory(const MagneticSystem& s, const FramePoint& w0,
                    const std::vector<JacobiSample>& jac, double dt, const std::string& path) {
  auto frames = integrateFrameFlow(s, w0, jac.back().t, dt);
  std::ofstream csv(path);
  const int n = s.dim();
  csv << "t";
  for (int i = 0; i < n; ++i) csv << ",p" << i + 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) csv << ",w" << i + 1 << j + 1;
  csv << ",a";
  for (int i = 0; i < n - 1; ++i) csv << ",H" << i + 1;
  for (int i = 0; i < n - 1; ++i) csv << ",V" << i + 1;
  csv << "\n";
  char num[64];
  for (size_t k = 0; k < frames.size(); ++k) {
    auto put = [&](double v) {
      std::snprintf(num, sizeof(num), ",%.17g", v);
      csv << num;
    };
    std::snprintf(num, sizeof(num), "%.17g", frames[k].t);
    csv << num;
    for (int i = 0; i < n; ++i) put(frames[k].w.p(i));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) put(frames[k].w.W(i, j));
    put(jac[k].j.a);
    for (int i = 0; i < n - 1; ++i) put(jac[k].j.H(i));
    for (int i = 0; i < n - 1; ++i) put(jac[k].j.V(i));
    csv << "\n";
  }
}

int runJacobi(const SystemOptions& so, std::uint64_t seed, double horizon,
              const std::string& dumpPath, const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  auto s = makeConfiguredSystem(so);
  const int n = s.dim();
  Rng rng(seed);
  SuiteReport rep{"jacobi"};

  FramePoint w0 = randomFramePoint(s, rng);
  Eigen::VectorXd dp = rng.vector(n), dvRaw = rng.vector(n);
  Eigen::VectorXd v0 = w0.W.col(0);
  Eigen::MatrixXd g = s.metric.metric(w0.p);
  auto dgs = s.metric.metricDerivatives(w0.p);
  double gdot = 0.0;
  for (int k = 0; k < n; ++k) gdot += dp(k) * v0.dot(dgs[k] * v0);
  Eigen::VectorXd dv = dvRaw - (v0.dot(g * dvRaw) + 0.5 * gdot) / v0.dot(g * v0) * v0;

  auto oracle = jacobiFdOracle(s, w0, dp, dv, horizon, 1e-3);
  auto prop = jacobiPropagate(s, w0, oracle.front().j, horizon, 1e-3);
  double worst = 0.0;
  for (size_t i = 0; i < prop.size(); i += 20) {
    worst = std::max(worst, std::abs(prop[i].j.a - oracle[i].j.a));
    worst = std::max(worst, (prop[i].j.H - oracle[i].j.H).norm());
    worst = std::max(worst, (prop[i].j.V - oracle[i].j.V).norm());
  }
  rep.add("propagation_vs_variation_oracle", worst, 1e-4);

  Eigen::VectorXd h0 = rng.vector(n - 1), vv = rng.vector(n - 1);
  Eigen::VectorXd vFull = Eigen::VectorXd::Zero(n);
  vFull.tail(n - 1) = vv;
  auto fm = jacobiPropagateFM(s, w0, {0.0, h0, wedge<double>(Eigen::VectorXd::Unit(n, 0), vFull)},
                              horizon, 1e-3);
  auto sm = jacobiPropagate(s, w0, {0.0, h0, vv}, horizon, 1e-3);
  double fmWorst = 0.0;
  for (size_t i = 0; i < fm.size(); i += 20) {
    fmWorst = std::max(fmWorst, std::abs(fm[i].second.a - sm[i].j.a));
    fmWorst = std::max(fmWorst, (fm[i].second.H - sm[i].j.H).norm());
    Eigen::VectorXd ve1 = fm[i].second.V * Eigen::VectorXd::Unit(n, 0);
    fmWorst = std::max(fmWorst, (ve1.tail(n - 1) - sm[i].j.V).norm());
  }
  rep.add("frame_bundle_form_projection", fmWorst, 1e-5);
  if (!dumpPath.empty()) dumpTrajectory(s, w0, prop, 1e-3, dumpPath);
  return finish(rep, elapsed(t0), outDir);
}

int runPestov(const SystemOptions& so, std::uint64_t seed, int grid, int count, int degree,
              const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  SuiteReport rep{"pestov"};
  CircleBundle g(so.conformal, grid, grid, grid);
  Eigen::ArrayXd table = tangentialTableClosedForm(g);
  double worst = 0.0;
  json fields = json::array();
  for (int it = 0; it < count; ++it) {
    auto u = randomBandlimited(g, degree, 10, rng);
    auto r = pestovResidual(g, u, table);
    worst = std::max(worst, std::abs(r.residual) / std::max(1.0, r.nvXs));
    fields.push_back({{"nv_xsigma_sq", r.nvXs},
                      {"xsigma_nv_sq", r.xsNv},
                      {"xsigma_sq", r.xs},
                      {"curvature_term", r.curv},
                      {"residual", r.residual}});
  }
  std::filesystem::create_directories(outDir);
  json detail = {{"grid", {grid, grid, grid}},
                 {"degree", degree},
                 {"seed", seed},
                 {"fields", fields}};
  std::ofstream js(outDir + "/pestov_terms.json");
  js << detail.dump(2) << "\n";
  rep.add("scalar_pestov_identity", worst, 1e-8);
  return finish(rep, elapsed(t0), outDir);
}

int runLocalized(const SystemOptions& so, std::uint64_t seed, int grid, int mMax,
                 const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  SuiteReport rep{"localized"};
  CircleBundle g(so.conformal, grid, grid, grid);
  Eigen::ArrayXd table = tangentialTableClosedForm(g);
  json fields = json::array();
  for (int m = 2; m <= mMax; ++m) {
    auto um = randomHarmonic(g, m, 4, 6, rng);
    auto r = localizedPestovResidual(g, um, m, table);
    rep.add("localized_identity_m" + std::to_string(m),
            std::abs(r.residual) / std::max(1.0, r.xPlus), 1e-8);
    auto d = gradientDecomposition(g, um, m);
    rep.add("gradient_decomposition_m" + std::to_string(m),
            std::max(d.reconstructionResidual, d.maxPairwiseInner), 1e-10);
    fields.push_back({{"m", m},
                      {"xminus_term", r.xMinus},
                      {"xplus_term", r.xPlus},
                      {"omegav_term", r.omegaV},
                      {"z_norm_sq", r.zNorm},
                      {"curvature_term", r.curv},
                      {"residual", r.residual}});
  }
  std::filesystem::create_directories(outDir);
  json detail = {{"grid", {grid, grid, grid}}, {"seed", seed}, {"fields", fields}};
  std::ofstream js(outDir + "/localized_terms.json");
  js << detail.dump(2) << "\n";
  return finish(rep, elapsed(t0), outDir);
}

int runPinching(int nLow, int nHigh, double delta, const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  SuiteReport rep{"pinching"};
  std::filesystem::create_directories(outDir);
  std::ofstream csv(outDir + "/pinching_table.csv");
  csv << "n,groups,nu_max,delta_star,known,margin\n";
  json rows = json::array();
  for (int n = nLow; n <= nHigh; ++n) {
    auto groups = groupList(n);
    std::string names;
    bool nuKnown = true;
    Rational nuMax = 0;
    for (const auto& g : groups) {
      if (!names.empty()) names += " ";
      names += g.name(n);
      auto v = nu(g, n);
      if (!v.known)
        nuKnown = false;
      else
        nuMax = std::max(nuMax, v.value);
    }
    auto ds = deltaStar(n);
    auto margin = ds.known ? epsilonMargin(delta, n) : std::nullopt;
    char dsBuf[64];
    std::snprintf(dsBuf, sizeof(dsBuf), "%.17g", ds.value);
    std::ostringstream nuStr;
    if (nuKnown)
      nuStr << nuMax;
    else
      nuStr << "unknown";
    csv << n << "," << (names.empty() ? "-" : names) << "," << nuStr.str() << ","
        << (ds.known ? dsBuf : "unknown") << "," << (ds.known ? 1 : 0) << ",";
    if (margin)
      csv << *margin;
    else
      csv << "unknown";
    csv << "\n";
    rows.push_back({{"n", n},
                    {"groups", names},
                    {"nu_max", nuStr.str()},
                    {"delta_star", ds.known ? json(ds.value) : json("unknown")},
                    {"margin", margin ? json(*margin) : json("unknown")}});
    std::printf("n=%3d  groups=[%s]  nu_max=%s  delta*=%s\n", n, names.c_str(),
                nuStr.str().c_str(), ds.known ? dsBuf : "unknown");
  }
  std::ofstream js(outDir + "/pinching.json");
  js << rows.dump(2) << "\n";

  rep.add("delta_star_7_is_8_over_11", std::abs(deltaStar(7).value - 8.0 / 11.0), 0.0);
  rep.add("delta_star_8_is_8_over_11", std::abs(deltaStar(8).value - 8.0 / 11.0), 0.0);
  rep.add("margin_zero_at_threshold_10", std::abs(*epsilonMargin(deltaStar(10).value, 10)), 1e-12);
  return finish(rep, elapsed(t0), outDir);
}

int runTomo(long maxM, long maxN, const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  SuiteReport rep{"tomo"};
  std::filesystem::create_directories(outDir);
  std::ofstream csv(outDir + "/tomo_table.csv");
  csv << "m,n,alpha,beta,gamma,C\n";
  long bad = 0, total = 0;
  for (long m = 1; m <= maxM; ++m)
    for (long n = 2; n <= maxN; ++n) {
      if (m + n < 4) continue;
      auto c = tomo::coeffs(m, n);
      auto v = tomo::verifyC(m, n);
      ++total;
      if (!v.equal || !tomo::dropInequalityHolds(m, n)) ++bad;
      csv << m << "," << n << "," << c.alpha << "," << c.beta << "," << c.gamma << "," << c.C
          << "\n";
    }
  long introBad = 0;
  for (long n = 2; n <= maxN; ++n)
    if (tomo::introSpecialization(n) != tomo::closedFormC(2, n)) ++introBad;
  rep.add("quadratic_equals_closed_form_sweep", static_cast<double>(bad), 0.0);
  rep.add("intro_specialization_sweep", static_cast<double>(introBad), 0.0);
  std::printf("tomo sweep: %ld pairs checked exactly\n", total);
  return finish(rep, elapsed(t0), outDir);
}

int runPoincare(int n, int res, int randomCount, std::uint64_t seed, const std::string& outDir) {
  auto t0 = std::chrono::steady_clock::now();
  SuiteReport rep{"poincare"};
  auto extremizer = [](const Eigen::MatrixXd& w) { return w(2, 1); };
  auto ext = poincareCheck(extremizer, n, res);
  rep.add("extremizer_ratio_is_one", std::abs(ext.ratio - 1.0), 1e-6);

  Rng rng(seed);
  double worst = 0.0;
  for (int it = 0; it < randomCount; ++it) {
    auto repI = poincareCheck(randomObservable(n, rng), n, res);
    worst = std::max(worst, repI.ratio);
  }
  rep.add("random_observables_ratio_below_one", std::max(0.0, worst - 1.0), 1e-6);
  return finish(rep, elapsed(t0), outDir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magnetic-connection verification laboratory"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "read options from a TOML file");
  app.allow_config_extras(false);

  std::uint64_t seed = 20260810;
  std::string outDir = "reports";
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("--out-dir", outDir, "report output directory")->capture_default_str();

  SystemOptions tensorSys, bracketSys, jacobiSys;
  tensorSys.name = "nonclosed-t3";
  int tensorSamples = 200;
  auto* tensors = app.add_subcommand("tensors", "closed-form tensor consistency checks");
  addSystemOptions(tensors, tensorSys);
  tensors->add_option("--samples", tensorSamples, "random samples")->capture_default_str();

  int bracketPoints = 100;
  auto* brackets = app.add_subcommand("brackets", "structural equations via the bracket oracle");
  addSystemOptions(brackets, bracketSys);
  brackets->add_option("--points", bracketPoints, "random frame points")->capture_default_str();

  double jacobiT = 5.0;
  std::string jacobiDump;
  auto* jacobi = app.add_subcommand("jacobi", "Jacobi propagation vs the variation oracle");
  addSystemOptions(jacobi, jacobiSys);
  jacobi->add_option("--horizon", jacobiT, "integration time")->capture_default_str();
  jacobi->add_option("--dump", jacobiDump, "write the trajectory (t, p, frame, a, H, V) as CSV");

  SystemOptions pestovSys, localizedSys;
  int pestovGrid = 64, pestovCount = 20, pestovDegree = 10;
  auto* pestov = app.add_subcommand("pestov", "scalar magnetic Pestov identity on the torus");
  addSystemOptions(pestov, pestovSys);
  pestov->add_option("--grid", pestovGrid, "grid points per axis")->capture_default_str();
  pestov->add_option("--count", pestovCount, "random test fields")->capture_default_str();
  pestov->add_option("--degree", pestovDegree, "band limit of test fields")->capture_default_str();

  int localizedGrid = 64, localizedMaxM = 4;
  auto* localized = app.add_subcommand("localized", "localized Pestov identity per degree");
  addSystemOptions(localized, localizedSys);
  localized->add_option("--grid", localizedGrid, "grid points per axis")->capture_default_str();
  localized->add_option("--max-m", localizedMaxM, "highest fiber degree")->capture_default_str();

  int pinchLow = 3, pinchHigh = 16;
  double pinchDelta = 0.9;
  auto* pinching = app.add_subcommand("pinching", "pinching thresholds and margins");
  pinching->add_option("--n", pinchLow, "single dimension (sets both ends)");
  pinching->add_option("--n-high", pinchHigh, "range end")->capture_default_str();
  pinching->add_option("--delta", pinchDelta, "pinching constant for the margin column")
      ->capture_default_str();

  long tomoMaxM = 40, tomoMaxN = 40;
  auto* tomoCmd = app.add_subcommand("tomo", "exact tomography constant sweep");
  tomoCmd->add_option("--max-m", tomoMaxM, "largest tensor degree")->capture_default_str();
  tomoCmd->add_option("--max-n", tomoMaxN, "largest dimension")->capture_default_str();

  int poincareN = 3, poincareRes = 48, poincareCount = 50;
  auto* poincare = app.add_subcommand("poincare", "Poincare inequality on SO(n) by quadrature");
  poincare->add_option("--n", poincareN, "group dimension (3 or 4)")->capture_default_str();
  poincare->add_option("--resolution", poincareRes, "grid per angle")->capture_default_str();
  poincare->add_option("--count", poincareCount, "random observables")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (tensors->parsed()) return runTensors(tensorSys, seed, tensorSamples, outDir);
    if (brackets->parsed()) return runBrackets(bracketSys, seed, bracketPoints, outDir);
    if (jacobi->parsed()) return runJacobi(jacobiSys, seed, jacobiT, jacobiDump, outDir);
    if (pestov->parsed())
      return runPestov(pestovSys, seed, pestovGrid, pestovCount, pestovDegree, outDir);
    if (localized->parsed())
      return runLocalized(localizedSys, seed, localizedGrid, localizedMaxM, outDir);
    if (pinching->parsed()) {
      int hi = pinching->count("--n") && !pinching->count("--n-high") ? pinchLow : pinchHigh;
      return runPinching(pinchLow, hi, pinchDelta, outDir);
    }
    if (tomoCmd->parsed()) return runTomo(tomoMaxM, tomoMaxN, outDir);
    if (poincare->parsed()) return runPoincare(poincareN, poincareRes, poincareCount, seed, outDir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
