// akc-lab: build stage stores, run invariant suites, render figures,
// compute orbit-average certificates and Liouville witnesses.
//
// Exit codes: 0 all checks pass, 1 a check or computation failed,
// 2 usage or configuration error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "akc/continued_fraction.hpp"
#include "akc/errors.hpp"
#include "akc/lab/birkhoff.hpp"
#include "akc/lab/config.hpp"
#include "akc/lab/render.hpp"
#include "akc/lab/report.hpp"
#include "akc/lab/store.hpp"
#include "akc/lab/verify.hpp"

namespace fs = std::filesystem;
using namespace akc;
using namespace akc::lab;

namespace {

struct Globals {
  std::string config;
  std::string run_dir = "run";
  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
};

void apply_overrides(RunConfig& c, const Globals& g) {
  if (g.threads) c.schedule.threads = *g.threads;
  if (g.seed) c.schedule.seed = *g.seed;
}

RunConfig load_config(const Globals& g) {
  RunConfig c = g.config.empty() ? config_from_json(json::object()) : config_from_json(read_json_file(g.config));
  apply_overrides(c, g);
  return c;
}

Store open_store(const Globals& g) {
  Store st = load_store(g.run_dir);
  apply_overrides(st.config, g);
  return st;
}

int cmd_build(const Globals& g) {
  const RunConfig cfg = load_config(g);
  const Store st = run_build(cfg, g.run_dir);
  for (const auto& r : st.records) {
    std::cout << "stage n=" << r.n << " q'=" << short_int(r.q_prime) << " q=" << short_int(r.q)
              << " gap_bound=" << fmt(r.gap_bound) << " epsilon=" << fmt(r.epsilon)
              << (r.gap_enforced ? (r.gap_ok() ? " [certified]" : " [FAILED]") : " [forced, not enforced]") << "\n";
  }
  std::cout << "wrote " << st.records.size() << " stage file(s) to " << g.run_dir << "\n";
  for (const auto& r : st.records)
    if (r.gap_enforced && !r.gap_ok()) return 1;
  return 0;
}

int cmd_verify(const Globals& g, const std::string& suite) {
  bool known = false;
  for (const auto& s : suite_names()) known = known || s == suite;
  if (!known) throw InvalidArgument("unknown suite '" + suite + "' (kernel, sets, conjugacy, norms, distribution, all)");
  const Store st = open_store(g);
  const Report rep = run_verify(st, suite);
  write_json_file(fs::path(g.run_dir) / ("report-" + suite + ".json"), rep.to_json());
  std::cout << rep.to_text();
  return rep.ok() ? 0 : 1;
}

struct RenderArgs {
  std::string q = "3";
  int n = 5;
  int d = 2;
  std::string mode = "torus";
  int size = 256;
  std::size_t stage = 0;
  std::size_t points = 10000;
};

int cmd_render(const Globals& g, const std::string& target, const RenderArgs& a) {
  const fs::path dir = g.run_dir;
  const fs::path prefix = dir / ("render-" + target);
  const unsigned threads = g.threads.value_or(0);
  Integer q;
  try {
    q = Integer(a.q);
  } catch (const std::invalid_argument&) {
    throw InvalidArgument("bad --q '" + a.q + "'");
  }
  RenderResult res;
  if (target == "partitions") {
    res = render_partitions(q, a.d, a.size, prefix);
  } else if (target == "agreement-set") {
    res = render_agreement_set(a.n, q, a.d, parse_mode(a.mode), a.size, prefix, threads);
  } else if (target == "orbit") {
    const Store st = open_store(g);
    res = render_orbit(st, a.stage, a.points, a.size, prefix, st.config.schedule.seed);
  } else {
    throw InvalidArgument("unknown render target '" + target + "' (partitions, agreement-set, orbit)");
  }
  std::cout << "wrote " << res.csv.string() << " (" << res.rows << " rows) and " << res.pgm.string() << "\n";
  return 0;
}

int cmd_birkhoff(const Globals& g, const BirkhoffOptions& o) {
  const Store st = open_store(g);
  const auto res = run_birkhoff(st, o);
  write_text_file(fs::path(g.run_dir) / "birkhoff.csv", birkhoff_csv(res));
  write_json_file(fs::path(g.run_dir) / "birkhoff.json", birkhoff_json(res));
  std::cout << birkhoff_csv(res);
  return res.all_pass() ? 0 : 1;
}

struct LiouvilleArgs {
  std::string alpha;
  unsigned k_max = 3;
  std::string delta = "1/1000";
  unsigned cap_bits = 1 << 16;
};

int cmd_liouville(const Globals& g, const LiouvilleArgs& a) {
  RunConfig cfg = load_config(g);
  if (!a.alpha.empty()) cfg.alpha = a.alpha;
  auto stream = cfg.stream();
  const Integer cap = pow_of(Integer(2), a.cap_bits);
  json out;
  out["schema_version"] = kSchemaVersion;
  out["alpha"] = cfg.alpha;
  out["delta"] = a.delta;
  out["cap_bits"] = a.cap_bits;
  json ws = json::array();
  int code = 0;
  try {
    for (const auto& w : liouville_certificate(stream, a.k_max, parse_rational(a.delta), cap))
      ws.push_back({{"k", w.k}, {"q_bits", bit_length(w.q)}, {"value", fmt(w.value)}});
    out["found"] = true;
  } catch (const CertificateNotFound& e) {
    out["found"] = false;
    out["error"] = e.what();
    code = 1;
  }
  out["witnesses"] = ws;
  write_json_file(fs::path(g.run_dir) / "liouville.json", out);
  std::cout << out.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"akc-lab: smooth conjugation-approximation constructions on T^d and the cylinder"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "run configuration (JSON)");
  app.add_option("--run-dir", g.run_dir, "stage store directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
  app.add_option("--seed", g.seed, "sampling seed");

  auto* build = app.add_subcommand("build", "build the stage schedule and write the store");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "run an invariant suite on the store");
  verify->add_option("suite", suite, "kernel | sets | conjugacy | norms | distribution | all")->required();

  std::string target;
  RenderArgs ra;
  auto* render = app.add_subcommand("render", "write a raster and its CSV");
  render->add_option("target", target, "partitions | agreement-set | orbit")->required();
  render->add_option("--q", ra.q, "partition scale")->capture_default_str();
  render->add_option("--n", ra.n, "stage index for agreement-set")->capture_default_str();
  render->add_option("--d", ra.d, "dimension for partitions and agreement-set")->capture_default_str();
  render->add_option("--mode", ra.mode, "torus | cylinder")->capture_default_str();
  render->add_option("--size", ra.size, "raster side in pixels")->capture_default_str();
  render->add_option("--stage", ra.stage, "stage position for orbit")->capture_default_str();
  render->add_option("--points", ra.points, "orbit length")->capture_default_str();

  BirkhoffOptions bo;
  std::string bq;
  auto* birk = app.add_subcommand("birkhoff", "orbit-average certificates per stage");
  birk->add_option("--observable", bo.observable, "e.g. cos:1,0 or 1/2*sin:0,1+const:1")->capture_default_str();
  birk->add_option("--base-points", bo.base_points, "base points per stage")->capture_default_str();
  birk->add_option("--q-prime", bq, "orbit length override");

  LiouvilleArgs la;
  auto* liou = app.add_subcommand("liouville", "witnesses q^k ||q alpha|| < delta");
  liou->add_option("--alpha", la.alpha, "adaptive | golden | silver | list:... | file:...");
  liou->add_option("--k-max", la.k_max, "largest k")->capture_default_str();
  liou->add_option("--delta", la.delta, "threshold as p/q")->capture_default_str();
  liou->add_option("--cap-bits", la.cap_bits, "search cap on log2 q")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*build) return cmd_build(g);
    if (*verify) return cmd_verify(g, suite);
    if (*render) return cmd_render(g, target, ra);
    if (*birk) {
      if (!bq.empty()) {
        try {
          bo.q_prime = Integer(bq);
        } catch (const std::invalid_argument&) {
          throw InvalidArgument("bad --q-prime '" + bq + "'");
        }
      }
      return cmd_birkhoff(g, bo);
    }
    if (*liou) return cmd_liouville(g, la);
  } catch (const akc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_usage_error() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
