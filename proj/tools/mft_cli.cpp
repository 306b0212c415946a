#include "mft/diagnostics.hpp"
#include "mft/forward.hpp"
#include "mft/geometry.hpp"
#include "mft/hyperbolic2d.hpp"
#include "mft/inversion.hpp"
#include "mft/io.hpp"
#include "mft/phantoms.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace mft;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad number '" + s + "' in " + what);
  return v;
}

int to_int(const std::string& s, const std::string& what) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ConfigError("bad integer '" + s + "' in " + what);
  return v;
}

std::vector<double> doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& t : split(s, ',')) out.push_back(to_double(t, what));
  return out;
}

// "128x128@-1,1" (cube bounds) or "128x96@x0,x1,y0,y1" (per axis).
GridSpec parse_grid(const std::string& text) {
  const auto at = text.find('@');
  if (at == std::string::npos) throw ConfigError("--grid must look like 128x128@-1,1");
  std::vector<int> dims;
  for (const auto& t : split(text.substr(0, at), 'x')) dims.push_back(to_int(t, "--grid"));
  const auto b = doubles(text.substr(at + 1), "--grid");
  const int n = static_cast<int>(dims.size());
  if (n < 1 || n > kMaxReconstructionDim) throw ConfigError("--grid needs 1 to 3 dimensions");
  Vector lo(n);
  Vector hi(n);
  if (b.size() == 2) {
    lo.setConstant(b[0]);
    hi.setConstant(b[1]);
  } else if (b.size() == static_cast<std::size_t>(2 * n)) {
    for (int i = 0; i < n; ++i) {
      lo[i] = b[2 * i];
      hi[i] = b[2 * i + 1];
    }
  } else {
    throw ConfigError("--grid bounds must be 'lo,hi' or one 'lo,hi' pair per axis");
  }
  GridSpec g = GridSpec::box(dims, lo, hi);
  g.validate();
  return g;
}

DirectionSet parse_dirs(const std::string& text, int n) {
  const auto parts = split(text, ',');
  if (parts.empty() || parts.size() > 2) throw ConfigError("--dirs must be N or N,M");
  const int a = to_int(parts[0], "--dirs");
  if (n == 2) return direction_set_circle(a);
  const int m = parts.size() == 2 ? to_int(parts[1], "--dirs") : 2 * a;
  return direction_set(n, a, m);
}

std::string read_text_or_inline(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream is(arg);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  }
  return arg;
}

std::ofstream open_report(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  return os;
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    open_report(path) << text;
  }
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mft: reconstruction from integrals over generalized hypersurface families"};
  app.require_subcommand(1);

  // phantom
  std::string ph_grid, ph_spec, ph_out, ph_pgm;
  auto* phantom_cmd = app.add_subcommand("phantom", "Rasterize a phantom onto a grid");
  phantom_cmd->add_option("--grid", ph_grid, "dims@bounds, e.g. 128x128@-1,1")->required();
  phantom_cmd->add_option("--spec", ph_spec, "spec file or inline shapes ('ellipse cx cy ax ay angle amp; ...')")->required();
  phantom_cmd->add_option("--out", ph_out, "output .mff")->required();
  phantom_cmd->add_option("--pgm", ph_pgm, "optional 2D image export");

  // project
  std::string pr_family = "family=euclidean", pr_field, pr_dirs, pr_lambda = "auto:256", pr_out;
  int pr_widen = 1;
  double pr_noise = 0.0;
  std::uint64_t pr_seed = 1;
  auto* project_cmd = app.add_subcommand("project", "Forward transform of a field");
  project_cmd->add_option("--family", pr_family, "family tag, e.g. family=hyperboloid;eps=2");
  project_cmd->add_option("--field", pr_field, "input .mff")->required();
  project_cmd->add_option("--dirs", pr_dirs, "N (circle) or N,M (polar x azimuth)")->required();
  project_cmd->add_option("--lambda", pr_lambda, "l0,dl,count or auto:count");
  project_cmd->add_option("--hat-widen", pr_widen, "splatting hat half-width in lambda bins");
  project_cmd->add_option("--noise", pr_noise, "additive Gaussian noise sigma on the sinogram");
  project_cmd->add_option("--seed", pr_seed, "noise seed");
  project_cmd->add_option("--out", pr_out, "output .mfs")->required();

  // invert
  std::string in_sino, in_grid, in_out, in_report, in_pgm;
  int in_accuracy = 2;
  int in_oversample = 4;
  double in_margin = -1.0;
  auto* invert_cmd = app.add_subcommand("invert", "Reconstruct a field from a sinogram");
  invert_cmd->add_option("--sinogram", in_sino, "input .mfs")->required();
  invert_cmd->add_option("--grid", in_grid, "output grid")->required();
  invert_cmd->add_option("--accuracy", in_accuracy, "derivative accuracy order (2 or 4)");
  invert_cmd->add_option("--mask-margin", in_margin, "exclusion radius around central sets (default 2 cells)");
  invert_cmd->add_option("--pv-oversample", in_oversample, "PV table oversampling, 0 = exact");
  invert_cmd->add_option("--out", in_out, "output .mff")->required();
  invert_cmd->add_option("--report", in_report, "text report");
  invert_cmd->add_option("--pgm", in_pgm, "optional 2D image export");

  // check-kernel
  std::string ck_family = "family=euclidean", ck_region, ck_eps = "0.05,4", ck_out;
  int ck_n = 2, ck_pairs = 100;
  double ck_tol = 1e-3;
  bool ck_inside = false;
  bool ck_strict = false;
  std::uint64_t ck_seed = 1;
  auto* kernel_cmd = app.add_subcommand("check-kernel", "Certify the vanishing kernel condition");
  kernel_cmd->add_option("--family", ck_family, "family tag");
  kernel_cmd->add_option("--region", ck_region, "sampling box 'lo,hi' or 'lo0,hi0,lo1,hi1,..'")->required();
  kernel_cmd->add_flag("--inside", ck_inside, "keep only points in the reconstruction region");
  kernel_cmd->add_option("--n", ck_n, "dimension (2..5)");
  kernel_cmd->add_option("--pairs", ck_pairs, "random pairs");
  kernel_cmd->add_option("--eps", ck_eps, "eps0,levels (eps0 relative to the pair's theta spread)");
  kernel_cmd->add_option("--tol", ck_tol, "relative residual threshold");
  kernel_cmd->add_option("--seed", ck_seed, "sampling seed");
  kernel_cmd->add_flag("--strict", ck_strict, "exit 3 when any pair fails");
  kernel_cmd->add_option("--out", ck_out, "report file (stdout when omitted)");

  // check-range
  std::string cr_sino, cr_out;
  int cr_k = 2;
  int cr_m = 0;
  auto* range_cmd = app.add_subcommand("check-range", "Moment (range) conditions of a sinogram");
  range_cmd->add_option("--sinogram", cr_sino, "input .mfs")->required();
  range_cmd->add_option("--k", cr_k, "highest moment order");
  range_cmd->add_option("--m", cr_m, "degree of theta in omega (default from the family)");
  range_cmd->add_option("--out", cr_out, "report file (stdout when omitted)");

  // check-pvtrig
  std::string pt_numer, pt_denom, pt_eps = "0.005,4", pt_out;
  int pt_n = 2;
  auto* pvtrig_cmd = app.add_subcommand("check-pvtrig", "Regularized integral of (s/t)^n over a period");
  pvtrig_cmd->add_option("--numer", pt_numer, "k:a0,..;b1,..")->required();
  pvtrig_cmd->add_option("--denom", pt_denom, "k:a0,..;b1,..")->required();
  pvtrig_cmd->add_option("--n", pt_n, "power");
  pvtrig_cmd->add_option("--eps", pt_eps, "eps0,levels");
  pvtrig_cmd->add_option("--out", pt_out, "report file (stdout when omitted)");

  // hyperset
  std::string hs_curve, hs_bbox = "-3,3,-3,3", hs_out, hs_pgm;
  int hs_res = 128;
  int hs_normals = 180;
  auto* hyperset_cmd = app.add_subcommand("hyperset", "Raster the hyperbolic set of a trigonometric curve");
  hyperset_cmd->add_option("--curve", hs_curve, "tri|square|pentagon|circle or 'poly|poly'")->required();
  hyperset_cmd->add_option("--bbox", hs_bbox, "xmin,xmax,ymin,ymax");
  hyperset_cmd->add_option("--res", hs_res, "pixels per axis");
  hyperset_cmd->add_option("--normals", hs_normals, "line directions tested per pixel");
  hyperset_cmd->add_option("--out", hs_out, "output .mff")->required();
  hyperset_cmd->add_option("--pgm", hs_pgm, "optional image export");

  // info
  std::string info_file;
  auto* info_cmd = app.add_subcommand("info", "Print the header of an .mff or .mfs file");
  info_cmd->add_option("--file", info_file, "file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*phantom_cmd) {
      const GridSpec grid = parse_grid(ph_grid);
      const PhantomSpec spec = parse_phantom_spec(read_text_or_inline(ph_spec), grid.n);
      const ScalarField f = phantom(spec, grid);
      write_field(f, ph_out);
      if (!ph_pgm.empty()) export_pgm(f, ph_pgm);
      std::cout << "wrote " << ph_out << " (" << grid.size() << " cells)\n";
    } else if (*project_cmd) {
      const ScalarField f = read_field(pr_field);
      const FamilyPtr family = make_family(parse_family_tag(pr_family), f.grid.n);
      const DirectionSet dirs = parse_dirs(pr_dirs, f.grid.n);
      ProjectOptions opt;
      opt.hat_widen = pr_widen;
      LambdaGrid lg;
      if (pr_lambda.rfind("auto:", 0) == 0) {
        lg = family->make_lambda_grid(f.grid, to_int(pr_lambda.substr(5), "--lambda"), pr_widen + 2);
      } else {
        const auto v = doubles(pr_lambda, "--lambda");
        if (v.size() != 3) throw ConfigError("--lambda must be l0,dl,count or auto:count");
        lg = LambdaGrid{v[0], v[1], static_cast<int>(v[2])};
        lg.validate();
      }
      ProjectReport rep;
      Sinogram s = project(f, *family, dirs, lg, opt, &rep);
      if (pr_noise > 0.0) {
        std::mt19937_64 rng(pr_seed);
        std::normal_distribution<double> noise(0.0, pr_noise);
        for (Eigen::Index i = 0; i < s.values.size(); ++i) s.values.data()[i] += noise(rng);
      } else if (pr_noise < 0.0) {
        throw ConfigError("--noise must be >= 0");
      }
      write_sinogram(s, pr_out);
      std::cout << "wrote " << pr_out << ": " << dirs.size() << " directions x " << lg.count
                << " lambda samples, dropped mass fraction " << fmt("%.3e", rep.dropped_fraction) << "\n";
    } else if (*invert_cmd) {
      const Sinogram s = read_sinogram(in_sino);
      const FamilyPtr family = make_family(parse_family_tag(s.family_tag), s.directions.dim());
      InversionConfig cfg;
      cfg.output_grid = parse_grid(in_grid);
      cfg.derivative_accuracy = in_accuracy;
      cfg.mask_margin = in_margin;
      cfg.pv_oversample = in_oversample;
      InversionReport rep;
      const ScalarField f = invert(s, *family, cfg, &rep);
      write_field(f, in_out);
      if (!in_pgm.empty()) export_pgm(f, in_pgm);
      std::ostringstream os;
      os << "family " << s.family_tag << "\nn " << family->dim() << "\nconstant " << rep.constant << "\nmasked_points "
         << rep.masked_points << "\nmasked_fraction " << rep.masked_fraction << "\ncoverage_warnings "
         << rep.coverage_warnings << "\ncoverage_fraction " << rep.coverage_fraction << "\ndn_min " << rep.dn_min
         << "\ndn_max " << rep.dn_max << "\n";
      if (!in_report.empty()) write_or_print(in_report, os.str());
      std::cout << "wrote " << in_out << "\n";
      if (rep.masked_fraction >= 1.0) throw NumericalError("invert: every output point is masked");
    } else if (*kernel_cmd) {
      const FamilyPtr family = make_family(parse_family_tag(ck_family), ck_n);
      const auto b = doubles(ck_region, "--region");
      Vector lo(ck_n);
      Vector hi(ck_n);
      if (b.size() == 2) {
        lo.setConstant(b[0]);
        hi.setConstant(b[1]);
      } else if (b.size() == static_cast<std::size_t>(2 * ck_n)) {
        for (int i = 0; i < ck_n; ++i) {
          lo[i] = b[2 * i];
          hi[i] = b[2 * i + 1];
        }
      } else {
        throw ConfigError("--region must be 'lo,hi' or one pair per axis");
      }
      std::function<bool(const Vector&)> accept = [&](const Vector& x) {
        return family->in_domain(x) && (!ck_inside || family->in_reconstruction_region(x));
      };
      const auto e = doubles(ck_eps, "--eps");
      if (e.size() != 2) throw ConfigError("--eps must be eps0,levels");
      CertifyConfig cfg;
      cfg.pairs = ck_pairs;
      cfg.eps0 = e[0];
      cfg.levels = static_cast<int>(e[1]);
      cfg.tolerance = ck_tol;
      cfg.seed = ck_seed;
      const KernelReport rep = certify_family(*family, box_sampler(lo, hi, accept), cfg);
      std::ostringstream os;
      rep.write(os);
      write_or_print(ck_out, os.str());
      std::cerr << rep.family_tag << " n=" << rep.n << ": " << rep.pairs.size() - rep.failures() << "/"
                << rep.pairs.size() << " pairs pass, max relative residual " << fmt("%.3e", rep.max_relative_residual())
                << "\n";
      if (ck_strict && rep.failures() > 0) return 3;
    } else if (*range_cmd) {
      const Sinogram s = read_sinogram(cr_sino);
      int m = cr_m;
      if (m == 0) m = make_family(parse_family_tag(s.family_tag), s.directions.dim())->trig_degree();
      std::ostringstream os;
      os << "# " << s.family_tag << " m=" << m << "\n";
      for (int k = 0; k <= cr_k; ++k) {
        const RangeReport r = range_check(s, k, m);
        os << "k=" << k << " degree=" << r.degree << " total=" << fmt("%.6e", r.total_energy)
           << " above=" << fmt("%.6e", r.energy_above) << " relative=" << fmt("%.6e", r.relative_energy_above)
           << (r.clipped ? " clipped=1" : "") << "\n";
      }
      write_or_print(cr_out, os.str());
    } else if (*pvtrig_cmd) {
      const auto e = doubles(pt_eps, "--eps");
      if (e.size() != 2) throw ConfigError("--eps must be eps0,levels");
      const PVTrigResult r =
          pv_trig(parse_trig_polynomial(pt_numer), parse_trig_polynomial(pt_denom), pt_n, e[0], static_cast<int>(e[1]));
      std::ostringstream os;
      for (std::size_t k = 0; k < r.eps.size(); ++k) {
        os << "eps=" << fmt("%.6e", r.eps[k]) << " value=" << fmt("%.12e", r.raw[k]) << "\n";
      }
      os << "extrapolated=" << fmt("%.12e", r.value) << " nodes=" << r.nodes << " sign_gap=" << fmt("%.3e", r.sign_gap) << " degree_ok=" << r.degree_ok
         << " real_rooted=" << r.real_rooted << " flagged=" << r.flagged() << "\n";
      write_or_print(pt_out, os.str());
    } else if (*hyperset_cmd) {
      const TrigCurve curve = parse_trig_curve(hs_curve);
      const auto b = doubles(hs_bbox, "--bbox");
      if (b.size() != 4) throw ConfigError("--bbox must be xmin,xmax,ymin,ymax");
      const HyperbolicRaster r = raster_hyperbolic_set(curve, Bbox2{b[0], b[1], b[2], b[3]}, hs_res, hs_normals);
      write_field(r.mask, hs_out);
      if (!hs_pgm.empty()) export_pgm(r.mask, hs_pgm);
      const ConvexityReport c = convexity_check(r.mask, &r.boundary);
      std::cout << "hyperbolic pixels " << c.mask_pixels << ", convexity defect fraction "
                << fmt("%.4f", c.defect_fraction) << "\n";
    } else if (*info_cmd) {
      std::cout << read_header_text(info_file);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
