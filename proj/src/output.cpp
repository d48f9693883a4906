#include "fdirw/output.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fdirw/svg.hpp"
#include "fdirw/text_io.hpp"

namespace fdirw {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<double> times_of(const KineticsRecord& k) {
  std::vector<double> t;
  for (const auto& s : k.samples) t.push_back(s.t);
  return t;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
}

void write_kinetics_csv(const std::filesystem::path& path, const KineticsRecord& kinetics) {
  auto out = open_out(path);
  out << "# Q_S_e=" << text::fmt(kinetics.Q_S_e) << " Q_L_0=" << text::fmt(kinetics.Q_L_0) << '\n';
  out << kKineticsHeader << '\n';
  for (const auto& s : kinetics.samples) {
    out << text::fmt(s.t) << ',' << text::fmt(s.Q_S) << ',' << text::fmt(s.Q_L_near) << ','
        << text::fmt(s.c_far) << ',' << text::fmt(s.Q_total) << '\n';
  }
}

KineticsRecord read_kinetics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open kinetics file " + path.string());
  KineticsRecord rec;
  std::string line = text::read_line(in, "kinetics constants");
  if (line.rfind("# Q_S_e=", 0) != 0) throw FormatError(path.string() + ": missing constants line");
  {
    const auto sp = line.find(" Q_L_0=");
    if (sp == std::string::npos) throw FormatError(path.string() + ": malformed constants line");
    rec.Q_S_e = text::parse_double(std::string_view(line).substr(8, sp - 8), "Q_S_e");
    rec.Q_L_0 = text::parse_double(std::string_view(line).substr(sp + 7), "Q_L_0");
  }
  if (text::read_line(in, "kinetics header") != kKineticsHeader) {
    throw FormatError(path.string() + ": unexpected kinetics column header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cols;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto comma = line.find(',', pos);
      const auto end = comma == std::string::npos ? line.size() : comma;
      cols.push_back(text::parse_double(std::string_view(line).substr(pos, end - pos), "value"));
      pos = end + 1;
    }
    if (cols.size() != 5) throw FormatError(path.string() + ": expected 5 columns");
    rec.samples.push_back({cols[0], cols[1], cols[2], cols[3], cols[4]});
  }
  return rec;
}

void write_report(const std::filesystem::path& path, const RunReport& report,
                  const KineticsRecord& kinetics) {
  auto out = open_out(path);
  out << "# kinetics.csv columns:\n"
      << "#   t        simulation time [s]\n"
      << "#   Q_S      total concentration in solid voxels\n"
      << "#   Q_L_near total concentration in near-field liquid voxels\n"
      << "#   c_far    far-field reservoir concentration\n"
      << "#   Q_total  Q_S + Q_L_near + c_far * N_far_equiv\n";
  out << "solver " << report.solver << '\n'
      << "precision " << to_string(report.mode) << '\n'
      << "steps " << report.steps << '\n'
      << "N " << report.n_groups << '\n'
      << "N_L " << report.n_liquid << '\n'
      << "N_S " << report.n_solid << '\n'
      << "Q_S_e " << text::fmt(kinetics.Q_S_e) << '\n'
      << "Q_L_0 " << text::fmt(kinetics.Q_L_0) << '\n';
  if (report.solver == "fdirw") {
    out << "flops_per_step " << report.flops_per_step << '\n'
        << "flops_total " << report.flops_total << '\n';
  }
  out << "clamp_events " << report.clamps << '\n'
      << "nonfinite_values " << report.nonfinite << '\n'
      << "over_absorbed_steps " << report.over_absorbed << '\n'
      << "max_conservation_error " << text::fmt(report.max_conservation_error) << '\n';
  if (!report.pre_correction_residual.empty()) {
    double worst = 0.0;
    for (double r : report.pre_correction_residual) worst = std::max(worst, std::fabs(r));
    out << "max_pre_correction_residual " << text::fmt(worst) << '\n';
  }
  if (!report.rel_error.empty()) {
    out << "max_abs_error " << text::fmt(*std::max_element(report.abs_error.begin(), report.abs_error.end())) << '\n'
        << "max_rel_error " << text::fmt(*std::max_element(report.rel_error.begin(), report.rel_error.end())) << '\n';
  }
}

void write_timing(const std::filesystem::path& path, const RunReport& report) {
  auto out = open_out(path);
  const auto& t = report.times;
  out << "# wall seconds per phase (not reproducible; excluded from output comparisons)\n"
      << "precondition " << t.precondition << '\n'
      << "mapping " << t.mapping << '\n'
      << "superpose " << t.superpose << '\n'
      << "remap " << t.remap << '\n'
      << "liquid_fd " << t.liquid_fd << '\n'
      << "solid " << t.solid << '\n'
      << "far_field " << t.far_field << '\n';
}

void write_comparison_csv(const std::filesystem::path& path, const PrecisionComparison& cmp) {
  auto out = open_out(path);
  out << 't';
  for (auto mode : kAllModes) {
    const auto name = to_string(mode);
    out << ",cS_" << name << ",AE_" << name << ",RE_" << name;
  }
  out << '\n';
  const auto& ref = cmp.run(PrecisionMode::Full).kinetics;
  std::vector<std::vector<double>> values;
  for (auto mode : kAllModes) values.push_back(normalized_solid(cmp.run(mode).kinetics));
  for (std::size_t i = 0; i < ref.samples.size(); ++i) {
    out << text::fmt(ref.samples[i].t);
    for (auto mode : kAllModes) {
      const auto m = static_cast<int>(mode);
      out << ',' << text::fmt(values[m][i]) << ',' << text::fmt(cmp.runs[m].report.abs_error[i])
          << ',' << text::fmt(cmp.runs[m].report.rel_error[i]);
    }
    out << '\n';
  }
}

void write_scaling_csv(const std::filesystem::path& path, const ScalingTable& table) {
  auto out = open_out(path);
  out << "# precision " << to_string(table.mode) << ", log-log slope of fdirw step time vs N_L = "
      << table.slope << '\n';
  out << "r_p,grid,N,N_L,N_S,flops,precondition_s,fdirw_step_s,fd_step_s\n";
  for (const auto& r : table.rows) {
    out << r.r_p << ',' << r.grid_size << ',' << r.n_groups << ',' << r.n_liquid << ','
        << r.n_solid << ',' << r.flops << ',' << r.precondition_seconds << ','
        << r.fdirw_step_seconds << ',' << r.fd_step_seconds << '\n';
  }
}

std::string kinetics_plot(const std::vector<std::pair<std::string, KineticsRecord>>& runs) {
  std::vector<svg::Series> series;
  for (const auto& [label, k] : runs) {
    svg::Series solid{label + " Q_S/Q_S^e", times_of(k), {}};
    svg::Series liquid{label + " Q_L/Q_L^0", times_of(k), {}};
    for (const auto& s : k.samples) {
      solid.y.push_back(s.Q_S / k.Q_S_e);
      liquid.y.push_back(s.Q_L_near / k.Q_L_0);
    }
    series.push_back(std::move(solid));
    series.push_back(std::move(liquid));
  }
  return svg::line_chart(series, {"Absorption kinetics", "t [s]", "normalized amount"});
}

std::string rel_error_plot(const PrecisionComparison& cmp) {
  std::vector<svg::Series> series;
  for (auto mode : {PrecisionMode::B32, PrecisionMode::Mixed, PrecisionMode::B16}) {
    const auto& run = cmp.run(mode);
    series.push_back({std::string(to_string(mode)), times_of(run.kinetics), run.report.rel_error});
  }
  svg::ChartOptions opts{"Relative error of normalized solid concentration vs full", "t [s]",
                         "RE"};
  opts.log_y = true;
  return svg::line_chart(series, opts);
}

std::string scaling_plot(const ScalingTable& table) {
  svg::Series measured{"FDiRW step", {}, {}, true};
  svg::Series fd{"FD liquid (same interval)", {}, {}, true};
  for (const auto& r : table.rows) {
    measured.x.push_back(static_cast<double>(r.n_liquid));
    measured.y.push_back(r.fdirw_step_seconds);
    fd.x.push_back(static_cast<double>(r.n_liquid));
    fd.y.push_back(r.fd_step_seconds);
  }
  std::ostringstream title;
  title << "Per-step wall time vs N_L (slope " << table.slope << ")";
  svg::ChartOptions opts{title.str(), "N_L", "seconds per macro step"};
  opts.log_x = true;
  opts.log_y = true;
  return svg::line_chart({measured, fd}, opts);
}

}  // namespace fdirw
