// curveflow: run, plot and audit gradient flows of closed B-spline curves.
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "curveflow/audit.hpp"
#include "curveflow/config.hpp"
#include "curveflow/frames_io.hpp"
#include "curveflow/svg.hpp"

using namespace curveflow;

namespace {

// Exit codes.
constexpr int kUsage = 2;
constexpr int kConfig = 3;
constexpr int kIo = 4;
constexpr int kAborted = 5;
constexpr int kStepLimit = 6;
constexpr int kAuditFailed = 7;
constexpr int kInternal = 10;

int report_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::json j = {{"error", kind}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

struct RunOptions {
  std::string config_path;
  std::string preset;
  std::string frames;
  std::string energy_csv;
  std::string svg_dir;
  std::optional<double> t_end;
  bool quiet = false;
};

int cmd_run(const RunOptions& o) {
  RunConfig cfg;
  if (!o.preset.empty()) {
    const auto p = find_preset(o.preset);
    if (!p) return report_error("config", "unknown preset \"" + o.preset + "\"", kConfig);
    cfg = p->config;
  } else {
    cfg = load_config(o.config_path);
  }
  if (!o.frames.empty()) cfg.outputs.frames = o.frames;
  if (!o.energy_csv.empty()) cfg.outputs.energy_csv = o.energy_csv;
  if (!o.svg_dir.empty()) cfg.outputs.svg_dir = o.svg_dir;
  if (o.t_end) cfg.t_end = *o.t_end;
  validate(cfg);

  const FrameMeta meta{cfg.degree, cfg.energy, cfg.quadrature_points, cfg.newton.line_element};
  std::optional<FrameWriter> writer;
  if (!cfg.outputs.frames.empty()) writer.emplace(cfg.outputs.frames, meta);

  const ClosedBSplineCurve initial = build_initial_curve(cfg);
  const FlowResult result = run_flow(initial, flow_settings(cfg), [&](const Frame& f) {
    if (writer) writer->write(f);
  });
  if (writer) writer->close();
  if (!cfg.outputs.energy_csv.empty()) emit_energy_csv(result.frames, cfg.outputs.energy_csv);
  if (!cfg.outputs.svg_dir.empty()) {
    SvgStyle style;
    style.markers = cfg.outputs.svg_markers;
    write_svg_frames(result.frames, cfg.outputs.svg_dir, cfg.outputs.svg_every, style);
  }

  const Frame& last = result.frames.back();
  if (!o.quiet) {
    std::printf("status=%s steps=%ld t=%.6g N=%d energy=%.10g turning_number=%d eliminations=%ld retries=%ld\n",
                to_string(result.status).c_str(), last.n, last.t, last.curve.size(), last.energy,
                last.turning_number, result.eliminations, result.retries);
  }
  if (result.status == FlowStatus::Aborted) return report_error("aborted", result.message, kAborted);
  if (result.status == FlowStatus::StepLimit) return report_error("step_limit", result.message, kStepLimit);
  return 0;
}

int cmd_plot(const std::string& frames_path, const std::string& out_dir, int every, bool no_markers, int width) {
  const auto records = load_frames(frames_path);
  std::vector<Frame> frames;
  frames.reserve(records.size());
  for (const auto& r : records) frames.push_back(r.frame);
  SvgStyle style;
  style.markers = !no_markers;
  style.width = width;
  const auto written = write_svg_frames(frames, out_dir, every, style);
  std::printf("wrote %zu svg files to %s\n", written.size(), out_dir.c_str());
  return 0;
}

int cmd_audit(const std::string& frames_path, double tol) {
  const auto records = load_frames(frames_path);
  AuditOptions opt;
  opt.identity_tol = tol;
  const AuditReport rep = audit_frames(records, opt);
  std::printf(
      "frames=%zu steps=%ld checked=%ld skipped_eliminations=%ld max_identity_gap=%.3e max_stored_deviation=%.3e "
      "energy_increases=%ld max_energy_rise=%.3e turning_mismatches=%ld turning_changes=%ld non_integral=%ld\n",
      records.size(), rep.steps, rep.steps_checked, rep.steps_skipped, rep.max_identity_gap, rep.max_stored_deviation,
      rep.energy_increases, rep.max_energy_rise, rep.turning_mismatches, rep.turning_changes, rep.non_integral);
  if (!rep.ok()) return report_error("audit_failed", rep.failures.front(), kAuditFailed);
  return 0;
}

int cmd_presets(const std::string& show) {
  if (!show.empty()) {
    const auto p = find_preset(show);
    if (!p) return report_error("config", "unknown preset \"" + show + "\"", kConfig);
    std::printf("%s\n", to_json(p->config).dump(2).c_str());
    return 0;
  }
  for (const auto& p : presets()) {
    const auto& c = p.config;
    std::printf("%-14s eps=%-5g N=%-3d tau=%-6g t_end=%-5g %s\n", p.name.c_str(), energy_scale(c.energy), c.spans,
                c.tau, c.t_end, p.description.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-dissipative gradient flows of closed B-spline curves"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "simulate a configuration");
  run->add_option("config", run_opts.config_path, "JSON run configuration");
  run->add_option("--preset", run_opts.preset, "use a built-in preset instead of a config file");
  run->add_option("--frames", run_opts.frames, "frame record output (JSON lines)");
  run->add_option("--energy-csv", run_opts.energy_csv, "energy time series output");
  run->add_option("--svg-dir", run_opts.svg_dir, "directory for SVG frames");
  run->add_option("--t-end", run_opts.t_end, "override the end time");
  run->add_flag("--quiet", run_opts.quiet, "suppress the summary line");

  std::string plot_frames;
  std::string plot_out;
  int plot_every = 10;
  bool plot_no_markers = false;
  int plot_width = 640;
  auto* plot = app.add_subcommand("plot", "render saved frames as SVG");
  plot->add_option("frames", plot_frames, "frame record file")->required();
  plot->add_option("--out", plot_out, "output directory")->required();
  plot->add_option("--every", plot_every, "render every k-th frame")->check(CLI::PositiveNumber);
  plot->add_flag("--no-markers", plot_no_markers, "omit control points");
  plot->add_option("--width", plot_width, "image width in pixels")->check(CLI::PositiveNumber);

  std::string audit_frames_path;
  double audit_tol = 1e-6;
  auto* audit = app.add_subcommand("audit", "re-verify dissipation and turning numbers of saved frames");
  audit->add_option("frames", audit_frames_path, "frame record file")->required();
  audit->add_option("--tol", audit_tol, "bound on |lhs - rhs|")->check(CLI::PositiveNumber);

  std::string show;
  auto* list = app.add_subcommand("presets", "list built-in configurations");
  list->add_option("--show", show, "print one preset as a JSON config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kUsage);
  }

  try {
    if (*run) {
      if (run_opts.config_path.empty() == run_opts.preset.empty()) {
        return report_error("usage", "run needs exactly one of <config> or --preset", kUsage);
      }
      return cmd_run(run_opts);
    }
    if (*plot) return cmd_plot(plot_frames, plot_out, plot_every, plot_no_markers, plot_width);
    if (*audit) return cmd_audit(audit_frames_path, audit_tol);
    if (*list) return cmd_presets(show);
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), kConfig);
  } catch (const FrameIoError& e) {
    return report_error("io", e.what(), kIo);
  } catch (const FlowError& e) {
    return report_error("flow", e.what(), kAborted);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kInternal);
  }
  return kUsage;
}
