// cpaft: command-line front end for the parallel-consistent advancing-front
// mesher. Exit codes: 0 ok, 1 usage, 2 bad input, 3 hash mismatch,
// 4 internal invariant violation.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpaft/errors.hpp"
#include "cpaft/io.hpp"
#include "cpaft/pipeline.hpp"
#include "cpaft/quality.hpp"
#include "cpaft/shapes.hpp"

namespace {

using namespace cpaft;

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kMismatch = 3, kInvariant = 4 };

struct MeshOptions {
  std::string input;
  int np = 1;
  int threads = 0;  // 0: one per rank
  std::string sfc_level = "auto";
  double beta1 = 0.40;
  double beta2 = 0.15;
  double eta = 0.15;
  double bias = 0.7;
  std::optional<double> h_min;
  std::optional<double> h_max;
  int smooth_iters = 0;
  bool verbose = false;
};

void add_mesh_options(CLI::App* cmd, MeshOptions& o, bool with_np) {
  cmd->add_option("--input", o.input, "Boundary file (.json or .poly)")->required()->check(CLI::ExistingFile);
  if (with_np) cmd->add_option("--np", o.np, "Logical ranks")->check(CLI::PositiveNumber);
  cmd->add_option("--sfc-level", o.sfc_level, "Background grid level, or 'auto'");
  cmd->add_option("--beta1", o.beta1, "Criterion A clearance factor");
  cmd->add_option("--beta2", o.beta2, "Criterion B clearance factor");
  cmd->add_option("--eta", o.eta, "Minimum relative element height");
  cmd->add_option("--vertex-bias", o.bias, "Quality fraction at which an existing vertex wins over a new point");
  cmd->add_option("--h-min", o.h_min, "Smallest admissible local scale");
  cmd->add_option("--h-max", o.h_max, "Largest admissible local scale");
  cmd->add_option("--smooth-iters", o.smooth_iters, "Laplacian sweeps after generation")->check(CLI::NonNegativeNumber);
  cmd->add_flag("-v,--verbose", o.verbose, "Print boundary warnings and run statistics");
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1) throw PreconditionError(std::string(what) + ": '" + item + "' is not a positive integer");
    out.push_back(v);
  }
  if (out.empty()) throw PreconditionError(std::string(what) + " is empty");
  return out;
}

io::LoadedBoundary load(const MeshOptions& o) {
  auto loaded = io::load_boundary(o.input, io::format_for(o.input), {o.h_min, o.h_max});
  if (o.verbose)
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
  return loaded;
}

pipeline::GenerateParams make_params(const MeshOptions& o, const io::LoadedBoundary& loaded) {
  pipeline::GenerateParams p;
  auto& a = p.advance;
  a.beta1 = o.beta1;
  a.beta2 = o.beta2;
  a.eta = o.eta;
  a.existing_vertex_bias = o.bias;
  a.h_min = o.h_min.value_or(loaded.declared.h_min.value_or(loaded.boundary.min_h()));
  a.h_max = o.h_max.value_or(loaded.declared.h_max.value_or(loaded.boundary.max_h()));
  a.validate();
  p.n_ranks = o.np;
  p.n_threads = o.threads > 0 ? o.threads : o.np;
  if (o.sfc_level == "auto") {
    p.sfc_level = 0;
  } else {
    try {
      p.sfc_level = std::stoi(o.sfc_level);
    } catch (const std::exception&) {
      throw PreconditionError("--sfc-level must be an integer or 'auto'");
    }
    if (p.sfc_level < 1 || p.sfc_level > 16) throw PreconditionError("--sfc-level must lie in [1, 16]");
  }
  return p;
}

struct Run {
  pipeline::GenerateResult result;
  double seconds = 0.0;
  std::string hash;
};

Run run_once(const Boundary& boundary, const pipeline::GenerateParams& params, int smooth_iters) {
  const auto t0 = std::chrono::steady_clock::now();
  Run run{pipeline::generate(boundary, params), 0.0, {}};
  if (smooth_iters > 0)
    quality::laplacian_smooth(run.result.state.mesh, {smooth_iters, params.n_ranks, params.n_threads});
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run.hash = io::canonical_hash(run.result.state.mesh);
  return run;
}

int cmd_mesh(const MeshOptions& o, const std::string& output, const std::string& format,
             const std::string& manifest) {
  const auto loaded = load(o);
  const auto params = make_params(o, loaded);
  const Run run = run_once(loaded.boundary, params, o.smooth_iters);
  const auto& mesh = run.result.state.mesh;
  io::export_mesh(mesh, output, format == "obj" ? io::MeshFormat::Obj : io::MeshFormat::Vtk);
  if (!manifest.empty()) {
    std::ofstream os(manifest);
    if (!os) throw Error("cannot write manifest " + manifest);
    pipeline::write_manifest(os, params, run.result.stats, run.result.state, run.hash);
    os << "smooth_iters: " << o.smooth_iters << '\n';
  }
  const auto q = quality::quality_report(mesh);
  std::cout << "elements " << mesh.elements.size() << "  vertices " << mesh.live_vertex_count() << "  iterations "
            << run.result.stats.iterations << "  merges " << run.result.stats.merges << "  min alpha "
            << std::setprecision(4) << q.min_alpha << "  " << std::fixed << std::setprecision(3) << run.seconds
            << " s\nhash " << run.hash << '\n';
  if (o.verbose) q.write_text(std::cout);
  return kOk;
}

int cmd_check(const MeshOptions& o, const std::string& np_list) {
  const auto nps = parse_int_list(np_list, "--np-list");
  const auto loaded = load(o);
  std::string first;
  bool same = true;
  for (int np : nps) {
    MeshOptions each = o;
    each.np = np;
    const Run run = run_once(loaded.boundary, make_params(each, loaded), o.smooth_iters);
    std::cout << "np " << std::setw(3) << np << "  elements " << std::setw(8) << run.result.state.mesh.elements.size()
              << "  iterations " << std::setw(5) << run.result.stats.iterations << "  " << run.hash << '\n';
    if (first.empty()) first = run.hash;
    same = same && run.hash == first;
  }
  std::cout << (same ? "consistent" : "MISMATCH") << '\n';
  return same ? kOk : kMismatch;
}

int cmd_quality(const std::string& input, const std::string& csv) {
  const Mesh mesh = io::read_vtk(std::filesystem::path(input));
  const auto q = quality::quality_report(mesh);
  q.write_text(std::cout);
  if (!csv.empty()) {
    std::ofstream os(csv);
    if (!os) throw Error("cannot write " + csv);
    q.write_csv(os);
  }
  return kOk;
}

int cmd_bench(const MeshOptions& o, const std::string& threads_list, int repeat) {
  const auto threads = parse_int_list(threads_list, "--threads-list");
  const auto loaded = load(o);
  MeshOptions base = o;
  if (base.np < 1) base.np = *std::max_element(threads.begin(), threads.end());
  std::cout << "ranks " << base.np << "\n threads   seconds   elements   elements/s   speedup  hash\n";
  double reference = 0.0;
  std::string first;
  bool same = true;
  for (int t : threads) {
    MeshOptions each = base;
    each.threads = t;
    const auto params = make_params(each, loaded);
    Run best;
    best.seconds = -1.0;
    for (int k = 0; k < repeat; ++k) {
      Run run = run_once(loaded.boundary, params, o.smooth_iters);
      if (best.seconds < 0.0 || run.seconds < best.seconds) best = std::move(run);
    }
    if (reference == 0.0) reference = best.seconds;
    const double n = double(best.result.state.mesh.elements.size());
    std::printf("%8d %9.3f %10.0f %12.0f %9.2f  %.16s\n", t, best.seconds, n, n / best.seconds,
                reference / best.seconds, best.hash.c_str());
    if (first.empty()) first = best.hash;
    same = same && best.hash == first;
  }
  if (!same) std::cout << "MISMATCH: output depends on the thread count\n";
  return same ? kOk : kMismatch;
}

int cmd_make_boundary(const std::string& shape, double h, int edges, const std::string& output) {
  Boundary b;
  if (shape == "square") b = shapes::unit_square(h);
  else if (shape == "l-shape") b = shapes::l_shape(h);
  else if (shape == "gear") b = shapes::gear({.h = h});
  else if (shape == "hexagon") b = shapes::hexagon(1.0, h);
  else b = shapes::disk(1.0, edges);
  std::ofstream os(output);
  if (!os) throw Error("cannot write " + output);
  os << io::boundary_to_json(b);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-consistent advancing-front triangle mesher"};
  app.require_subcommand(1);

  MeshOptions mesh_opts;
  std::string output, format = "vtk", manifest;
  auto* mesh = app.add_subcommand("mesh", "Generate a mesh from a boundary file");
  add_mesh_options(mesh, mesh_opts, true);
  mesh->add_option("--output", output, "Mesh file to write")->required();
  mesh->add_option("--format", format, "Output format")->check(CLI::IsMember({"vtk", "obj"}));
  mesh->add_option("--threads", mesh_opts.threads, "Worker threads (default: one per rank)");
  mesh->add_option("--manifest", manifest, "Write a run manifest here");

  MeshOptions check_opts;
  std::string np_list = "1,2,4,8";
  auto* check = app.add_subcommand("check-consistency", "Mesh at several rank counts and compare hashes");
  add_mesh_options(check, check_opts, false);
  check->add_option("--np-list", np_list, "Comma-separated rank counts");

  std::string quality_input, quality_csv;
  auto* qual = app.add_subcommand("quality", "Quality histogram of a VTK mesh");
  qual->add_option("--input", quality_input, "Legacy VTK mesh")->required()->check(CLI::ExistingFile);
  qual->add_option("--csv", quality_csv, "Also write the histogram as CSV");

  MeshOptions bench_opts;
  bench_opts.np = 0;
  std::string threads_list = "1,2,4";
  int repeat = 1;
  auto* bench = app.add_subcommand("bench", "Wall-clock time per worker-thread count");
  add_mesh_options(bench, bench_opts, false);
  bench->add_option("--threads-list", threads_list, "Comma-separated thread counts");
  bench->add_option("--np", bench_opts.np, "Logical ranks (default: largest thread count)");
  bench->add_option("--repeat", repeat, "Runs per thread count; the fastest is reported")->check(CLI::PositiveNumber);

  std::string shape = "square", shape_out;
  double shape_h = 0.1;
  int shape_edges = 768;
  auto* make = app.add_subcommand("make-boundary", "Write a reference boundary as JSON");
  make->add_option("--shape", shape)->check(CLI::IsMember({"square", "l-shape", "gear", "hexagon", "disk"}));
  make->add_option("--edge-length", shape_h, "Edge length target")->check(CLI::PositiveNumber);
  make->add_option("--edges", shape_edges, "Edge count of the disk")->check(CLI::Range(3, 1 << 20));
  make->add_option("--output", shape_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*mesh) return cmd_mesh(mesh_opts, output, format, manifest);
    if (*check) return cmd_check(check_opts, np_list);
    if (*qual) return cmd_quality(quality_input, quality_csv);
    if (*bench) return cmd_bench(bench_opts, threads_list, repeat);
    if (*make) return cmd_make_boundary(shape, shape_h, shape_edges, shape_out);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kInvariant;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
  return kUsage;
}
