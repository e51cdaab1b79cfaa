// shilov: command-line driver for the geometry, map and rigidity suites.
// Exit codes: 0 pass, 1 verification mismatch, 2 usage or config error, 3 numeric failure.

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <string>

#include "shilov/cr_maps.hpp"
#include "shilov/errors.hpp"
#include "shilov/frames.hpp"
#include "shilov/maurer_cartan.hpp"
#include "shilov/random.hpp"
#include "shilov/rigidity.hpp"

using namespace shilov;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kMismatch = 1, kUsage = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::uint64_t seed = 1;
  std::string output;
  int jet_order = kDefaultJetOrder;
  int p = 0, q = 0, pprime = 0, qprime = 0, m = 0;
  int basepoints = 5;
  std::size_t samples = 1000;
  double tol = 1e-9;
  std::string builtin;
  std::string map_file;
  std::uint64_t conjugate = 0;
  std::uint64_t section_seed = 0;
  std::string expect = "report-only";
};

void emit(const Config& c, const json& j) {
  if (c.output.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw UsageError("cannot write " + c.output);
  out << j.dump(2) << "\n";
}

SignatureForm shape(int p, int q, const char* what) {
  if (!(q >= 1 && p > q))
    throw UsageError(std::string(what) + ": need p > q >= 1, got p = " + std::to_string(p) + ", q = " + std::to_string(q));
  return SignatureForm(p, q);
}

json header(const char* command, const Config& c) {
  return {{"schema_version", kReportSchemaVersion}, {"rng", Rng::kName}, {"command", command}, {"seed", c.seed}};
}

std::shared_ptr<const CRMap> load_map(const Config& c) {
  if (!c.map_file.empty() && !c.builtin.empty()) throw UsageError("give either --map or --builtin, not both");
  std::shared_ptr<const CRMap> core;
  if (!c.map_file.empty()) {
    std::ifstream in(c.map_file);
    if (!in) throw UsageError("cannot read " + c.map_file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError(std::string("map file is not JSON: ") + e.what());
    }
    try {
      core = map_from_json(j);
    } catch (const ShilovError& e) {
      throw UsageError(std::string("map file: ") + e.what());
    }
  } else if (c.builtin == "standard") {
    shape(c.p, c.q, "source");
    shape(c.pprime, c.qprime, "target");
    try {
      core = standard_embedding(c.p, c.q, c.pprime, c.qprime);
    } catch (const ShilovError& e) {
      throw UsageError(e.what());
    }
  } else if (c.builtin == "whitney") {
    shape(c.p, c.q, "source");
    try {
      core = whitney_map(c.p, c.q, c.qprime, c.m);
    } catch (const ShilovError& e) {
      throw UsageError(e.what());
    }
  } else if (c.builtin == "blockdiag") {
    shape(c.p, c.q, "source");
    core = default_block_diagonal_map(c.p, c.q);
  } else if (c.builtin.empty()) {
    throw UsageError("a map is required: --map FILE or --builtin NAME");
  } else {
    throw UsageError("unknown builtin map '" + c.builtin + "'");
  }
  if (c.conjugate == 0) return core;
  return std::make_shared<ComposedMap>(core, random_automorphism(core->source(), c.conjugate),
                                       random_automorphism(core->target(), c.conjugate + 1));
}

// --- verify-geometry -------------------------------------------------------------

int cmd_verify_geometry(const Config& c) {
  const SignatureForm F = shape(c.p, c.q, "verify-geometry");
  if (c.jet_order < 2) throw UsageError("structure equations need --jet-order >= 2");
  if (c.basepoints < 1) throw UsageError("--basepoints must be positive");
  const auto points = sample_boundary(F, Rng::derive(c.seed, 1).next_u64(), c.basepoints);
  const ComplexMatrix S = gram_matrix(F, reference_frame(F));

  double gram = 0.0, det = 0.0, total = 0.0, sym = 0.0, trace = 0.0, contact = 0.0;
  std::array<double, 6> blocks{};
  for (std::size_t b = 0; b < points.size(); ++b) {
    const ComplexMatrix A = build_adapted_frame(F, points[b]).A;
    gram = std::max(gram, max_abs(gram_matrix(F, A) - S));
    det = std::max(det, std::abs(A.determinant() - 1.0));
    ChartOptions o;
    o.gauge_seed = Rng::derive(c.seed, 100 + b).next_u64() | 1;
    const ConnectionMatrix C = connection_from_frame_field(chart_through(F, points[b], c.jet_order, o));
    const StructureReport s = check_structure_equations(C, c.tol);
    total = std::max(total, s.total);
    sym = std::max(sym, s.symmetry);
    trace = std::max(trace, s.trace);
    for (std::size_t k = 0; k < blocks.size(); ++k) blocks[k] = std::max(blocks[k], s.blocks[k]);
    contact = std::max(contact, contact_modulo_reduction(C));
  }

  const bool frames_ok = gram <= 1e-10 && det <= 1e-10;
  const bool structure_ok = total <= c.tol;
  const bool symmetry_ok = sym <= 1e-10 && trace <= 1e-12;
  const bool contact_ok = contact <= c.tol;
  json j = header("verify-geometry", c);
  j["p"] = c.p;
  j["q"] = c.q;
  j["jet_order"] = c.jet_order;
  j["basepoints"] = c.basepoints;
  j["suites"] = {
      {"frames", {{"gram", gram}, {"det", det}, {"pass", frames_ok}}},
      {"structure",
       {{"max_residual", total},
        {"blocks", {{"phi", blocks[0]}, {"theta", blocks[1]}, {"psi", blocks[2]}, {"omega", blocks[3]}, {"sigma", blocks[4]}, {"xi", blocks[5]}}},
        {"pass", structure_ok}}},
      {"symmetry", {{"symmetry", sym}, {"trace", trace}, {"pass", symmetry_ok}}},
      {"contact", {{"residual", contact}, {"pass", contact_ok}}}};
  const char* failed = !frames_ok ? "frames" : !structure_ok ? "structure" : !symmetry_ok ? "symmetry" : !contact_ok ? "contact" : nullptr;
  j["pass"] = failed == nullptr;
  if (failed) j["failed_suite"] = failed;
  emit(c, j);
  if (failed) std::cerr << "verify-geometry: suite '" << failed << "' failed\n";
  return failed ? kMismatch : kPass;
}

// --- verify-map --------------------------------------------------------------------

int cmd_verify_map(const Config& c) {
  const auto f = load_map(c);
  if (c.samples == 0) throw UsageError("--samples must be positive");
  const SignatureForm& F = f->source();
  const BoundaryReport b =
      verify_boundary_preserving(*f, sample_boundary(F, Rng::derive(c.seed, 1).next_u64(), c.samples), 1e-10);

  json cr = json::array();
  bool cr_ok = true, immersion = true;
  double worst_cr = 0.0;
  if (b.pass) {
    const auto points = sample_boundary(F, Rng::derive(c.seed, 2).next_u64(), c.basepoints);
    for (const auto& z : points) {
      const CRReport r = verify_cr(*f, chart_through(F, z, 1), c.tol);
      cr_ok = cr_ok && r.pass;
      immersion = immersion && r.immersion;
      worst_cr = std::max(worst_cr, r.cr_residual);
      cr.push_back({{"contact", r.contact_residual},
                    {"holomorphic", r.holomorphic_residual},
                    {"min_singular_value", r.min_singular_value},
                    {"immersion", r.immersion},
                    {"pass", r.pass}});
    }
  }

  json j = header("verify-map", c);
  j["map_id"] = f->id();
  j["source"] = {F.p(), F.q()};
  j["target"] = {f->target().p(), f->target().q()};
  j["bound_ok"] = bound_holds(F, f->target());
  j["boundary"] = {{"samples", b.samples}, {"max_residual", b.max_residual}, {"pass", b.pass}};
  j["cr"] = {{"basepoints", cr}, {"max_residual", worst_cr}, {"pass", b.pass && cr_ok}};
  j["immersion"] = b.pass && immersion;
  const bool pass = b.pass && cr_ok;
  j["pass"] = pass;
  emit(c, j);
  if (!b.pass) std::cerr << "verify-map: boundary residual " << b.max_residual << "\n";
  else if (!cr_ok) std::cerr << "verify-map: CR residual " << worst_cr << "\n";
  return pass ? kPass : kMismatch;
}

// --- rigidity ---------------------------------------------------------------------

int cmd_rigidity(const Config& c) {
  if (c.expect != "equivalent" && c.expect != "inequivalent" && c.expect != "report-only")
    throw UsageError("--expect must be equivalent, inequivalent or report-only");
  if (c.jet_order < 2) throw UsageError("the pipeline needs --jet-order >= 2");
  const auto f = load_map(c);
  PipelineOptions o;
  o.seed = c.seed;
  o.section_seed = c.section_seed;
  o.basepoints = c.basepoints;
  o.jet_order = c.jet_order;
  const RigidityReport r = run_pipeline(*f, o);
  json j = header("rigidity", c);
  j.update(report_to_json(r));
  j["expect"] = c.expect;
  bool ok = true;
  if (c.expect == "equivalent") ok = r.equivalence.status == "equivalent" && r.aligned.pass;
  else if (c.expect == "inequivalent") ok = r.equivalence.status == "inequivalent";
  j["pass"] = ok;
  emit(c, j);
  if (!ok) std::cerr << "rigidity: expected " << c.expect << ", got " << r.equivalence.status << "\n";
  return ok ? kPass : kMismatch;
}

// --- make-map --------------------------------------------------------------------

int cmd_make_map(const Config& c) {
  if (c.builtin.empty()) throw UsageError("make-map needs --builtin");
  const auto f = load_map(c);
  json j;
  if (const auto* composed = dynamic_cast<const ComposedMap*>(f.get())) j = map_to_json(*composed);
  else j = map_to_json(dynamic_cast<const PolyMatrixMap&>(*f));
  emit(c, j);
  return kPass;
}

void set_threads() {
  const char* env = std::getenv("RIGIDITY_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw UsageError("RIGIDITY_THREADS must be a positive integer");
  omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigidity checks for proper holomorphic maps between Shilov boundaries"};
  app.require_subcommand(1);
  Config c;

  auto common = [&](CLI::App* s) {
    s->add_option("--seed", c.seed, "Seed for all randomness")->capture_default_str();
    s->add_option("--output,-o", c.output, "Write the JSON report here instead of stdout");
  };
  auto map_source = [&](CLI::App* s) {
    s->add_option("--builtin", c.builtin, "standard, whitney or blockdiag");
    s->add_option("--map", c.map_file, "Map JSON file");
    s->add_option("--p", c.p, "Source p");
    s->add_option("--q", c.q, "Source q");
    s->add_option("--pprime", c.pprime, "Target p (standard)");
    s->add_option("--qprime", c.qprime, "Target q (standard, whitney)");
    s->add_option("--m", c.m, "Identity block size (whitney)");
    s->add_option("--conjugate", c.conjugate, "Compose with random automorphisms from this seed (0 = off)");
  };

  auto* geo = app.add_subcommand("verify-geometry", "Frame, structure-equation, symmetry and contact suites");
  common(geo);
  geo->add_option("--p", c.p)->required();
  geo->add_option("--q", c.q)->required();
  geo->add_option("--basepoints", c.basepoints)->capture_default_str();
  geo->add_option("--jet-order", c.jet_order)->capture_default_str();
  geo->add_option("--tol", c.tol)->capture_default_str();

  auto* vmap = app.add_subcommand("verify-map", "Boundary-preservation and CR checks");
  common(vmap);
  map_source(vmap);
  vmap->add_option("--samples", c.samples)->capture_default_str();
  vmap->add_option("--basepoints", c.basepoints)->capture_default_str();
  vmap->add_option("--tol", c.tol, "CR tolerance")->capture_default_str();

  auto* rig = app.add_subcommand("rigidity", "Run the rigidity pipeline");
  common(rig);
  map_source(rig);
  rig->add_option("--expect", c.expect, "equivalent, inequivalent or report-only")->capture_default_str();
  rig->add_option("--section-seed", c.section_seed, "Seed for the frame sections (0 derives it)");
  rig->add_option("--basepoints", c.basepoints)->capture_default_str();
  rig->add_option("--jet-order", c.jet_order)->capture_default_str();

  auto* make = app.add_subcommand("make-map", "Write a builtin map as JSON");
  common(make);
  map_source(make);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    set_threads();
    if (geo->parsed()) return cmd_verify_geometry(c);
    if (vmap->parsed()) return cmd_verify_map(c);
    if (rig->parsed()) return cmd_rigidity(c);
    return cmd_make_map(c);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ShilovError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMismatch;
  }
}
