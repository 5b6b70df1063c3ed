#include <solitonforge/solitonforge.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <random>

using namespace solitonforge;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + out);
  f << text;
}

std::string render(const GridDump& d, const std::string& out, const std::string& format) {
  bool csv = format == "csv" || (format.empty() && out.size() > 4 && out.substr(out.size() - 4) == ".csv");
  return csv ? dump_csv(d) : dump_json(d);
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

// ---- soliton ----------------------------------------------------------------

WaveMap build_soliton(double m, const std::vector<double>& thetas, const std::string& cls) {
  if (thetas.empty()) throw PreconditionViolation("--zs needs at least one angle");
  if (cls == "su2") return to_wavemap(periodic_soliton(m, thetas));
  if (cls == "s2") {
    FlowSolution s = sge_vacuum(m);
    auto pi = herm_proj(vec({1.0, 1.0}));
    for (double th : thetas) s = dress_s2(s, std::polar(1.0, th), pi);
    return to_wavemap(s);
  }
  if (cls == "cpn" || cls == "sn") {
    Matrix a0 = Matrix::Zero(3, 3);
    a0(0, 2) = m;
    a0(2, 0) = -m;
    FlowSolution vac = vacuum_solution(ConjugatedDiagonal::from_skew_hermitian(a0));
    if (cls == "cpn") {
      FlowSolution s = tag_if_real(vac, SymmetryClass::CPn);
      Vector w(2);
      w << 1.0 / std::sqrt(2.0), kI / std::sqrt(2.0);
      for (double th : thetas) s = dress_symmetric(s, cp_simple_element(std::polar(1.0, th), w, 1.0));
      return to_wavemap(s);
    }
    FlowSolution s = tag_if_real(vac, SymmetryClass::Sn);
    Eigen::VectorXd w(2);
    w << 0.6, 0.8;
    for (double th : thetas) s = dress_symmetric(s, sn_simple_element(std::polar(1.0, th), w, 1.0));
    return to_wavemap(s);
  }
  throw PreconditionViolation("--class must be su2, s2, cpn or sn");
}

// ---- verify -----------------------------------------------------------------

struct SuiteResult {
  double max_deviation = 0.0;
  double threshold = 0.0;
  double ratio_min = INFINITY, ratio_max = 0.0;
  bool uses_ratio = false;

  bool pass() const {
    return max_deviation <= threshold && (!uses_ratio || (ratio_min >= 3.5 && ratio_max <= 4.5));
  }
  json to_json() const {
    json j = {{"max_deviation", max_deviation}, {"threshold", threshold}, {"pass", pass()}};
    if (uses_ratio) j["halving_ratio"] = {ratio_min, ratio_max};
    return j;
  }
  void ratio(double coarse, double fine) {
    uses_ratio = true;
    ratio_min = std::min(ratio_min, coarse / fine);
    ratio_max = std::max(ratio_max, coarse / fine);
  }
};

// periodic chain: m in {1,2}, distinct angles with 2m cos(theta) an integer, k <= 4
FlowSolution random_chain(std::mt19937_64& rng) {
  const int m = 1 + static_cast<int>(rng() % 2);
  std::vector<int> ns;
  for (int n = -2 * m + 1; n <= 2 * m - 1; ++n) ns.push_back(n);
  std::shuffle(ns.begin(), ns.end(), rng);
  const int k = 1 + static_cast<int>(rng() % std::min<std::size_t>(4, ns.size()));
  std::vector<double> th;
  for (int i = 0; i < k; ++i) th.push_back(std::acos(ns[i] / (2.0 * m)));
  return periodic_soliton(m, th);
}

SuiteResult suite_flow(std::mt19937_64& rng, bool lax) {
  SuiteResult r;
  r.threshold = 1e-7;  // fourth-order (Richardson) residual; the central one is checked through its halving ratio
  std::uniform_real_distribution<double> U(-2, 2), rho(0.5, 2.0), phi(0, 2 * kPi);
  for (int c = 0; c < 5; ++c) {
    FlowSolution sol = random_chain(rng);
    for (int p = 0; p < 10; ++p) {
      CharPoint q{U(rng), U(rng)};
      if (!lax) {
        r.ratio(flow_residual(sol, q, 1e-3).max(), flow_residual(sol, q, 5e-4).max());
        r.max_deviation = std::max(r.max_deviation, flow_residual(sol, q, 1e-3, 4).max());
        continue;
      }
      cplx l;
      do l = std::polar(rho(rng), phi(rng));
      while (sol.near_pole(l, 0.2));
      r.ratio(lax_flatness_residual(sol, q, l, 1e-3), lax_flatness_residual(sol, q, l, 5e-4));
      r.max_deviation = std::max(r.max_deviation, lax_flatness_residual(sol, q, l, 1e-3, 4));
    }
  }
  return r;
}

SuiteResult suite_wavemap(std::mt19937_64& rng) {
  SuiteResult r;
  r.threshold = 1e-7;
  std::uniform_real_distribution<double> U(-2, 2);
  for (int c = 0; c < 4; ++c) {
    WaveMap s = to_wavemap(random_chain(rng));
    for (int p = 0; p < 5; ++p) {
      double x = U(rng), t = U(rng);
      double coarse = wavemap_residual(s, x, t, 1e-3), fine = wavemap_residual(s, x, t, 5e-4);
      r.ratio(coarse, fine);
      r.max_deviation = std::max(r.max_deviation, wavemap_residual(s, x, t, 1e-3, 4));
    }
  }
  return r;
}

SuiteResult suite_reality(std::mt19937_64& rng) {
  SuiteResult r;
  r.threshold = 1e-9;
  for (int c = 0; c < 3; ++c)
    r.max_deviation = std::max(r.max_deviation, check_reality(random_chain(rng), SymmetryClass::None).worst());
  std::uniform_real_distribution<double> N(-1, 1), ang(0.2, kPi / 2 - 0.2), ph(0, 2 * kPi);
  const std::vector<cplx> lambdas{2.0, cplx(1, 1), cplx(0, -3), 0.5, -1.7, cplx(0.3, -0.8)};
  for (int c = 0; c < 10; ++c) {
    cplx z = std::polar(0.5 + 1.5 * (N(rng) + 1) / 2, ang(rng));
    Vector w(2);
    w << cplx(N(rng), N(rng)), cplx(N(rng), N(rng));
    w /= w.norm();
    r.max_deviation =
        std::max(r.max_deviation, check_reality(cp_simple_element(z, w, std::polar(1.0, ph(rng))), SymmetryClass::CPn, lambdas).worst());
    Eigen::VectorXd wr(2);
    wr << N(rng), N(rng);
    wr /= wr.norm();
    r.max_deviation =
        std::max(r.max_deviation, check_reality(sn_simple_element(z, wr, N(rng) < 0 ? -1.0 : 1.0), SymmetryClass::Sn, lambdas).worst());
  }
  return r;
}

int run_verify(const std::string& suite, std::uint64_t seed) {
  const std::vector<std::string> all{"flow", "lax", "wavemap", "reality"};
  std::vector<std::string> which = suite == "all" ? all : std::vector<std::string>{suite};
  json out = {{"schema", kSchema}, {"command", "verify"}, {"seed", seed}, {"suites", json::object()}};
  bool ok = true;
  for (const auto& name : which) {
    std::mt19937_64 rng(seed);
    SuiteResult r = name == "flow"      ? suite_flow(rng, false)
                    : name == "lax"     ? suite_flow(rng, true)
                    : name == "wavemap" ? suite_wavemap(rng)
                                        : suite_reality(rng);
    out["suites"][name] = r.to_json();
    ok = ok && r.pass();
  }
  out["pass"] = ok;
  std::cout << out.dump(1) << "\n";
  return ok ? 0 : 1;
}

// ---- spectrum, asymptote, sge, blowup -----------------------------------------

std::vector<double> distinct_real(std::vector<double> ks, double tol) {
  std::sort(ks.begin(), ks.end(), [](double a, double b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) > std::abs(b) : a > b;
  });
  std::vector<double> out;
  for (double k : ks)
    if (std::none_of(out.begin(), out.end(), [&](double o) { return std::abs(o - k) <= tol; })) out.push_back(k);
  return out;
}

std::string run_spectrum(int m, int ngrid, int jcut) {
  ModeSpectrum ex = linear_modes(m, jcut);
  json exact = {{"real_eigenvalues", json::array()}, {"real_modes", json::array()},
                {"imaginary_modes", json::array()}, {"kernel_dim", ex.kernel_dim}};
  std::vector<double> reals;
  for (const auto& md : ex.real_pairs) {
    reals.push_back(md.k.real());
    exact["real_modes"].push_back({{"k", md.k.real()}, {"j", md.j}});
  }
  exact["real_eigenvalues"] = distinct_real(reals, 1e-12);
  for (const auto& md : ex.imag_pairs) exact["imaginary_modes"].push_back({{"k", cjson(md.k)}, {"j", md.j}});

  NumericSpectrum num = numeric_spectrum(m, ngrid);
  std::vector<double> nreal;
  for (cplx k : num.eigenvalues)
    if (std::abs(k.imag()) < 1e-6 && std::abs(k.real()) > 1e-6) nreal.push_back(k.real());
  json numeric = {{"n_grid", ngrid}, {"real_eigenvalues", distinct_real(nreal, 1e-6)}, {"kernel_dim", num.kernel_dim}};
  json out = {{"schema", kSchema}, {"command", "spectrum"}, {"m", m}, {"exact", exact}, {"numeric", numeric}};
  return out.dump(1) + "\n";
}

std::string run_asymptote(double m, const std::vector<double>& thetas, std::optional<double> T) {
  WaveMap s = to_wavemap(periodic_soliton(m, thetas));
  AsymptoticReport r = asymptotic_analysis(s, T);
  json lm = json::array(), lp = json::array();
  for (std::size_t i = 0; i < r.x_samples.size(); ++i) {
    lm.push_back(to_json(r.limit_minus[i]));
    lp.push_back(to_json(r.limit_plus[i]));
  }
  json modes = json::array();
  for (auto [f, dir] : r.matched_modes) modes.push_back({{"frequency", f}, {"direction", dir}});
  json out = {{"schema", kSchema},
              {"command", "asymptote"},
              {"parameters", {{"m", m}, {"zs", thetas}}},
              {"T", r.T},
              {"homoclinic", r.homoclinic},
              {"heteroclinic", r.heteroclinic},
              {"decay_exponent_minus", r.decay_exponent_minus},
              {"decay_exponent_plus", r.decay_exponent_plus},
              {"expected_exponent", r.expected_exponent},
              {"residual_minus", r.residual_minus},
              {"residual_plus", r.residual_plus},
              {"predicted_frequencies", r.predicted_frequencies},
              {"matched_modes", modes},
              {"x_samples", r.x_samples},
              {"limit_minus", lm},
              {"limit_plus", lp}};
  return out.dump(1) + "\n";
}

GridDump run_sge(double theta, const std::string& grid) {
  auto [xa, ta] = parse_grid(grid);
  FlowSolution br = dress_s2(sge_vacuum(0.5), std::polar(1.0, theta), herm_proj(vec({1.0, 1.0})));
  WaveMap s = to_wavemap(br);
  SgeField q = sge_extract(br);
  GridDump d = sample_grid(s, xa, ta, "sge", {{"theta", theta}});
  std::vector<double> qv(static_cast<std::size_t>(xa.count) * ta.count);
  parallel_for(qv.size(), [&](std::size_t k) { qv[k] = q(xa.at(static_cast<int>(k % xa.count)), ta.at(static_cast<int>(k / xa.count))); });
  double dev = 0.0;
  for (std::size_t k = 0; k < qv.size(); ++k) {
    double x = xa.at(static_cast<int>(k % xa.count)), t = ta.at(static_cast<int>(k / xa.count));
    double qc = 4 * std::atan(std::sin(theta) * std::sin(t * std::cos(theta)) / (std::cos(theta) * std::cosh(x * std::sin(theta))));
    dev = std::max(dev, std::abs(qv[k] - qc));
  }
  d.aux["q"] = std::move(qv);
  d.results["max_closed_form_deviation"] = dev;
  return d;
}

GridDump run_blowup(const std::string& which, std::optional<double> a1, std::optional<double> a2, const std::string& grid) {
  BlowupScenario sc;
  if (which == "pos") sc = default_positive_scenario();
  else if (which == "neg") sc = default_negative_scenario();
  else throw PreconditionViolation("--case must be pos or neg");
  if (a1) sc.alpha1 = *a1;
  if (a2) sc.alpha2 = *a2;
  auto [xa, ta] = parse_grid(grid);
  auto W = scenario_W(sc);
  GridDump d;
  d.meta = {"blowup",
            {{"case", which}, {"alpha1", sc.alpha1}, {"alpha2", sc.alpha2}, {"y1", sc.y1}, {"y2", sc.y2}},
            "sl2r", xa, ta};
  std::vector<double> wv(static_cast<std::size_t>(xa.count) * ta.count);
  parallel_for(wv.size(), [&](std::size_t k) {
    const CharPoint p = CharPoint::from_xt(xa.at(static_cast<int>(k % xa.count)), ta.at(static_cast<int>(k / xa.count)));
    wv[k] = W(p.xi, p.eta);
  });
  d.aux["W"] = std::move(wv);
  try {
    auto b = blowup_scan(W, {xa.lo, xa.hi}, ta.hi, std::max(256, xa.count));
    d.results["first_blowup"] = b ? json{{"t", b->t}, {"x", b->x}} : json(nullptr);
  } catch (const BadCauchySlice& e) {
    d.results["first_blowup"] = nullptr;
    d.results["bad_cauchy_slice"] = e.what();
  }
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solitonforge: soliton wave maps by dressing"};
  app.require_subcommand(1);

  std::string out, format, grid, cls = "su2", suite = "all", which;
  double m = 1.0, theta = kPi / 3;
  int mi = 2, ngrid = 256, jcut = 6;
  std::uint64_t seed = 0;
  std::vector<double> zs;
  std::optional<double> T, alpha1, alpha2;

  auto* sol = app.add_subcommand("soliton", "k-soliton wave map sampled on a grid");
  sol->add_option("--m", m, "vacuum a = diag(im, -im)")->required();
  sol->add_option("--zs", zs, "pole angles theta_j, z_j = e^{i theta_j}")->delimiter(',')->required();
  sol->add_option("--class", cls, "su2|s2|cpn|sn")->check(CLI::IsMember({"su2", "s2", "cpn", "sn"}));
  sol->add_option("--grid", grid, "X0:X1:NX,T0:T1:NT")->default_val("0:6.283185307179586:65,-2:2:21");
  sol->add_option("--out", out, "output file (stdout if absent)");
  sol->add_option("--format", format, "json|csv")->check(CLI::IsMember({"json", "csv"}));

  auto* ver = app.add_subcommand("verify", "residual and identity suites");
  ver->add_option("--suite", suite)->check(CLI::IsMember({"flow", "lax", "wavemap", "reality", "all"}));
  ver->add_option("--seed", seed);

  auto* spectrum_cmd = app.add_subcommand("spectrum", "exact and numeric linearized spectrum");
  spectrum_cmd->add_option("--m", mi)->required();
  spectrum_cmd->add_option("--ngrid", ngrid);
  spectrum_cmd->add_option("--jcut", jcut, "largest j listed among imaginary modes");

  auto* sge = app.add_subcommand("sge", "sine-Gordon breather dump");
  sge->add_option("--theta", theta);
  sge->add_option("--grid", grid)->default_val("-5:5:41,-5:5:41");
  sge->add_option("--out", out);
  sge->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* asy = app.add_subcommand("asymptote", "t -> +-infinity limits of a periodic soliton");
  asy->add_option("--m", m)->required();
  asy->add_option("--zs", zs)->delimiter(',')->required();
  asy->add_option("--T", T);

  auto* blw = app.add_subcommand("blowup", "W field and first blow-up time of an SL(2,R) scenario");
  blw->add_option("--case", which)->required()->check(CLI::IsMember({"pos", "neg"}));
  blw->add_option("--alpha1", alpha1);
  blw->add_option("--alpha2", alpha2);
  blw->add_option("--grid", grid)->default_val("-10:10:201,0:10:201");
  blw->add_option("--out", out);
  blw->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sol) {
      GridDump d = sample_grid(build_soliton(m, zs, cls), parse_grid(grid).first, parse_grid(grid).second, "soliton",
                               {{"m", m}, {"zs", zs}, {"class", cls}});
      emit(render(d, out, format), out);
    } else if (*ver) {
      return run_verify(suite, seed);
    } else if (*spectrum_cmd) {
      std::cout << run_spectrum(mi, ngrid, jcut);
    } else if (*sge) {
      emit(render(run_sge(theta, grid), out, format), out);
    } else if (*asy) {
      std::cout << run_asymptote(m, zs, T);
    } else if (*blw) {
      emit(render(run_blowup(which, alpha1, alpha2, grid), out, format), out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
