#pragma once

// Command-line front end. Kept in a header so tests can drive run_cli()
// in-process.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rawcode/rawcode.hpp"

namespace rawcode::cli {

using Json = nlohmann::ordered_json;

// Bad flag values; reported with exit code 2.
struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error("usage", what) {}
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

// Converts flag-level parse failures into usage errors.
template <class F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

inline std::optional<Backend> parse_backend(const std::string& s) {
  if (s.empty() || s == "auto") return std::nullopt;
  if (s == "rational") return Backend::rational;
  if (s == "shift-stream") return Backend::shift_stream;
  if (s == "rotation-closed-form") return Backend::rotation_closed_form;
  throw UsageError("unknown backend '" + s + "'");
}

inline IntervalMap make_system(const std::string& id, unsigned precision, std::optional<Backend> backend) {
  if (id == "doubling") return as_usage([&] { return make_doubling_map(backend.value_or(Backend::shift_stream)); });
  if (id == "bridge") return as_usage([&] { return make_bridge_map(backend.value_or(Backend::shift_stream)); });
  if (id == "rotation")
    return as_usage([&] { return make_rotation(precision, backend.value_or(Backend::rotation_closed_form)); });
  if (!id.empty() && id[0] == '@') return read_map_file(id.substr(1), backend.value_or(Backend::rational));
  throw UsageError("unknown system '" + id + "' (doubling | bridge | rotation | @mapfile)");
}

inline Partition make_partition(const std::string& spec) {
  if (!spec.empty() && spec[0] == '@') return Partition::from_spec(spec);
  return as_usage([&] { return Partition::from_spec(spec); });
}

// "m" -> m equal bins, otherwise a partition spec.
inline Partition make_bins(const std::string& spec) {
  if (!spec.empty() && spec.find_first_not_of("0123456789") == std::string::npos) {
    const unsigned long m = std::stoul(spec);
    if (m == 0 || m > 4096) throw UsageError("bin count must be in 1..4096");
    std::vector<Interval> bins;
    for (unsigned long i = 0; i < m; ++i)
      bins.push_back({make_rational(static_cast<long>(i), m), make_rational(static_cast<long>(i + 1), m)});
    return Partition::from_intervals(bins, std::to_string(m) + " bins");
  }
  return make_partition(spec);
}

inline Rational parse_flag_rational(const std::string& flag, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

inline std::vector<Rational> parse_rational_list(const std::string& flag, const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_flag_rational(flag, tok));
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

inline std::vector<Symbol> parse_word(const std::string& text) {
  std::vector<Symbol> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos || tok.size() > 9)
      throw UsageError("--word: '" + tok + "' is not a symbol");
    out.push_back(static_cast<Symbol>(std::stoul(tok)));
  }
  return out;
}

inline Sampler parse_sampler(const std::string& s) {
  if (s == "independent") return Sampler::independent;
  if (s == "diagonal") return Sampler::diagonal;
  if (s == "offset") return Sampler::offset;
  if (s == "cross-halves") return Sampler::cross_halves;
  throw UsageError("unknown sampler '" + s + "'");
}

inline MixingMode parse_mode(const std::string& s) {
  if (s == "exact") return MixingMode::exact;
  if (s == "monte-carlo") return MixingMode::monte_carlo;
  if (s == "auto") return MixingMode::automatic;
  throw UsageError("unknown mixing mode '" + s + "'");
}

inline Json optional_json(const std::optional<size_t>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json interval_set_json(const IntervalSet& s) {
  Json parts = Json::array();
  for (const auto& p : s.parts()) parts.push_back(Json::array({to_string(p.lo), to_string(p.hi)}));
  return parts;
}

inline Json matrix_json(const StochasticMatrix& m) {
  Json rows = Json::array();
  for (const auto& row : m.rows()) {
    Json r = Json::array();
    for (const auto& v : row) r.push_back(to_string(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Json block_report_json(const ErgodicBlockReport& r) {
  Json j;
  j["scc_count"] = r.scc_count;
  j["sccs"] = r.sccs;
  j["closed_scc_count"] = r.closed_sccs.size();
  j["closed_sccs"] = r.closed_sccs;
  Json supports = Json::array();
  for (const auto& s : r.closed_supports) supports.push_back(interval_set_json(s));
  j["closed_supports"] = supports;
  j["connected"] = r.connected();
  j["primitive"] = r.primitive;
  j["kappa"] = optional_json(r.kappa);
  j["period"] = optional_json(r.period);
  return j;
}

inline Json hitting_json(const HittingStats& s) {
  Json j;
  j["samples"] = s.samples;
  j["successes"] = s.successes;
  j["success_rate"] = s.success_rate();
  const auto mean = s.mean_t_end();
  j["mean_t_end"] = mean ? Json(to_double(*mean)) : Json(nullptr);
  j["mean_t_end_exact"] = mean ? Json(to_string(*mean)) : Json(nullptr);
  Json hist = Json::array();
  for (size_t b = 0; b < s.log2_histogram.size(); ++b)
    hist.push_back(Json{{"lo", size_t{1} << b}, {"hi", size_t{2} << b}, {"count", s.log2_histogram[b]}});
  j["histogram"] = hist;
  return j;
}

inline std::string hitting_csv(const HittingStats& s) {
  std::ostringstream os;
  os << "bin_lo,bin_hi,count\n";
  for (size_t b = 0; b < s.log2_histogram.size(); ++b)
    os << (size_t{1} << b) << ',' << (size_t{2} << b) << ',' << s.log2_histogram[b] << '\n';
  return os.str();
}

} // namespace detail

/// Parsed flags shared by the subcommands. Defaults are the documented ones.
struct Options {
  std::string system = "doubling";
  std::string partition = "binary";
  std::string backend = "auto";
  unsigned precision = 64;
  size_t trajectories = 2;
  size_t window = 4;
  size_t audit_window = 8;
  std::optional<size_t> horizon;
  size_t samples = 1000;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
  std::string format;
  std::string output;
  std::string sampler;
  std::string offset;
  std::string x0;
  size_t stream_index = 0;
  size_t order = 3;
  unsigned k = 2;
  std::string bins;
  std::string set_a = "0:1/2";
  std::string set_b = "0:1/2";
  size_t terms = 16;
  std::string mode = "auto";
  size_t mc_samples = 100000;
  std::vector<std::string> streams;
  size_t alphabet = 2;
  std::string q;
  std::string probs;
  std::string word;
  std::string matrix;
  size_t length = 1000;
  size_t cap = kDefaultRefinementCap;
};

class Runner {
public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, char** argv) {
    CLI::App app{"rawcode: exact simulation and raw coding of interval maps"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    build(app);
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::CallForVersion&) {
      out_ << kVersion << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      return fail("usage", e.what(), kExitUsage);
    }
    if (o_.format.empty()) {
      const CLI::App* leaf = &app;
      while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
      o_.format = default_format_.at(leaf);
    }
    try {
      action_();
      return kExitOk;
    } catch (const UsageError& e) {
      return fail("usage", e.what(), kExitUsage);
    } catch (const Error& e) {
      return fail(e.kind(), e.what(), kExitRuntime);
    } catch (const std::exception& e) {
      return fail("internal", e.what(), kExitRuntime);
    }
  }

private:
  int fail(const std::string& kind, const std::string& message, int code) {
    err_ << Json{{"error", kind}, {"message", message}}.dump() << '\n';
    return code;
  }

  void warn(const std::string& message) { err_ << Json{{"warning", message}}.dump() << '\n'; }

  // --- flag groups -------------------------------------------------------

  void common(CLI::App* c, std::initializer_list<const char*> formats, const char* default_format) {
    c->add_option("--seed", o_.seed, "master seed (u64)")->capture_default_str();
    c->add_option("--workers", o_.workers, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
    c->add_option("--output,-o", o_.output, "write the report here instead of stdout");
    default_format_[c] = default_format;
    c->add_option("--format", o_.format, std::string("output format (default ") + default_format + ")")
        ->check(CLI::IsMember(std::vector<std::string>(formats.begin(), formats.end())));
  }

  void system_flags(CLI::App* c) {
    c->add_option("--system", o_.system, "doubling | bridge | rotation | @mapfile")->capture_default_str();
    c->add_option("--backend", o_.backend, "auto | rational | shift-stream | rotation-closed-form")
        ->capture_default_str();
    c->add_option("--precision", o_.precision, "rotation angle denominator bits (>= 64)")
        ->check(CLI::Range(64u, 4096u))
        ->capture_default_str();
  }

  void partition_flag(CLI::App* c) {
    c->add_option("--partition", o_.partition, "binary | dyadic:K | bridge:k | @file")->capture_default_str();
  }

  // --- subcommands -------------------------------------------------------

  void build(CLI::App& app) {
    auto* sim = app.add_subcommand("simulate", "exact orbit of one initial point");
    system_flags(sim);
    common(sim, {"json", "csv"}, "json");
    sim->add_option("--x0", o_.x0, "initial point (default: sampled from --seed)");
    sim->add_option("--stream", o_.stream_index, "substream index for the sampled point");
    sim->add_option("--horizon", o_.horizon, "number of orbit points (default 16)")->check(CLI::Range(size_t{1}, size_t{1} << 24));
    sim->callback([this] { action_ = [this] { cmd_simulate(); }; });

    auto* code = app.add_subcommand("code", "raw code of one orbit");
    system_flags(code);
    partition_flag(code);
    common(code, {"stream", "json", "csv"}, "stream");
    code->add_option("--x0", o_.x0, "initial point (default: sampled from --seed)");
    code->add_option("--stream", o_.stream_index, "substream index for the sampled point");
    code->add_option("--horizon", o_.horizon, "number of symbols (default 64)")->check(CLI::Range(size_t{1}, size_t{1} << 30));
    code->callback([this] { action_ = [this] { cmd_code(); }; });

    auto* ref = app.add_subcommand("refine", "cylinders of the n-th refinement");
    system_flags(ref);
    partition_flag(ref);
    common(ref, {"json", "csv"}, "json");
    ref->add_option("--n", o_.order, "refinement order")->capture_default_str();
    ref->add_option("--cap", o_.cap, "largest order accepted")->capture_default_str();
    ref->callback([this] { action_ = [this] { cmd_refine(); }; });

    auto* co = app.add_subcommand("coincide", "Monte Carlo search for coinciding code windows");
    system_flags(co);
    partition_flag(co);
    common(co, {"json", "csv"}, "json");
    co->add_option("--N", o_.trajectories, "number of trajectories (>= 2)")
        ->check(CLI::Range(size_t{2}, size_t{64}))
        ->capture_default_str();
    co->add_option("--L", o_.window, "window length")->check(CLI::Range(size_t{1}, size_t{1} << 20))->capture_default_str();
    co->add_option("--horizon", o_.horizon, "positions scanned per sample (default 10000)");
    co->add_option("--samples", o_.samples, "number of sampled N-tuples")->check(CLI::PositiveNumber)->capture_default_str();
    co->add_option("--sampler", o_.sampler, "independent | diagonal | offset | cross-halves (default: offset for rotation)");
    co->add_option("--offset", o_.offset, "offset d for the offset sampler (default 2/5)");
    co->callback([this] { action_ = [this] { cmd_coincide(); }; });

    auto* br = app.add_subcommand("bridge", "two-component map with a bridge partition element");
    common(br, {"json", "csv"}, "json");
    br->add_option("--k", o_.k, "bridge element [1/2 - 2^-k, 1/2 + 2^-k)")->check(CLI::Range(1u, 24u))->capture_default_str();
    br->add_option("--L", o_.window, "window length")->check(CLI::Range(size_t{1}, size_t{1} << 20))->capture_default_str();
    br->add_option("--horizon", o_.horizon, "positions scanned per pair (default 100000)");
    br->add_option("--samples", o_.samples, "number of pairs")->check(CLI::PositiveNumber)->capture_default_str();
    br->add_option("--bins", o_.bins, "half-aligned Ulam bins (default 8)");
    br->callback([this] { action_ = [this] { cmd_bridge(); }; });

    auto* mx = app.add_subcommand("mixing", "Cesaro means of correlation defects");
    system_flags(mx);
    common(mx, {"json", "csv"}, "json");
    mx->add_option("--A", o_.set_a, "set A as lo:hi,lo:hi")->capture_default_str();
    mx->add_option("--B", o_.set_b, "set B as lo:hi,lo:hi")->capture_default_str();
    mx->add_option("--n", o_.terms, "number of terms")->check(CLI::PositiveNumber)->capture_default_str();
    mx->add_option("--mode", o_.mode, "exact | monte-carlo | auto")->capture_default_str();
    mx->add_option("--mc-samples", o_.mc_samples, "points per sampled term")->check(CLI::PositiveNumber)->capture_default_str();
    mx->callback([this] { action_ = [this] { cmd_mixing(); }; });

    auto* ul = app.add_subcommand("ulam", "Ulam transition matrix and its block structure");
    system_flags(ul);
    common(ul, {"json", "csv", "matrix"}, "json");
    ul->add_option("--bins", o_.bins, "bin count or partition spec (default 8)");
    ul->callback([this] { action_ = [this] { cmd_ulam(); }; });

    auto* au = app.add_subcommand("audit", "coincidence statistics of external symbol streams");
    common(au, {"json"}, "json");
    au->add_option("--stream,streams", o_.streams, "stream files (two or more)")->required();
    au->add_option("--L", o_.audit_window, "run length")->check(CLI::Range(size_t{1}, size_t{1} << 20));
    au->add_option("--alphabet", o_.alphabet, "alphabet size")->check(CLI::Range(size_t{1}, size_t{1} << 24))->capture_default_str();
    au->callback([this] { action_ = [this] { cmd_audit(); }; });

    build_oracle(app);
  }

  void build_oracle(CLI::App& app) {
    auto* orc = app.add_subcommand("oracle", "exact baseline quantities");
    orc->require_subcommand(1);

    auto* rw = orc->add_subcommand("run-waiting", "completion time of an L-run of successes");
    common(rw, {"json", "csv"}, "json");
    rw->add_option("--q", o_.q, "success probability")->required();
    rw->add_option("--L", o_.window, "run length")->required()->check(CLI::Range(size_t{1}, size_t{4096}));
    rw->add_option("--horizon", o_.horizon, "also return P(t_end = t) for t <= horizon");
    rw->callback([this] { action_ = [this] { cmd_run_waiting(); }; });

    auto* wm = orc->add_subcommand("window", "probability of a fixed word under a Bernoulli law");
    common(wm, {"json"}, "json");
    wm->add_option("--probs", o_.probs, "symbol probabilities p0,p1,...")->required();
    wm->add_option("--word", o_.word, "symbols s1,s2,...")->required();
    wm->callback([this] { action_ = [this] { cmd_window(); }; });

    auto* rate = orc->add_subcommand("rate", "per-position coincidence probability of N Bernoulli streams");
    common(rate, {"json"}, "json");
    rate->add_option("--probs", o_.probs, "symbol probabilities")->required();
    rate->add_option("--N", o_.trajectories, "number of streams")->check(CLI::Range(size_t{2}, size_t{64}))->capture_default_str();
    rate->add_option("--L", o_.window, "window length for the mean waiting time")->capture_default_str();
    rate->callback([this] { action_ = [this] { cmd_rate(); }; });

    auto* pr = orc->add_subcommand("primitive", "primitivity of a stochastic matrix");
    common(pr, {"json"}, "json");
    pr->add_option("--matrix", o_.matrix, "matrix file")->required();
    pr->callback([this] { action_ = [this] { cmd_primitive(); }; });

    auto* st = orc->add_subcommand("stream", "seeded Bernoulli or Markov symbol stream");
    common(st, {"stream", "json"}, "stream");
    st->add_option("--probs", o_.probs, "Bernoulli probabilities (or Markov initial law with --matrix)");
    st->add_option("--matrix", o_.matrix, "Markov transition matrix file");
    st->add_option("--length", o_.length, "number of symbols")->capture_default_str();
    st->add_option("--stream", o_.stream_index, "substream index")->capture_default_str();
    st->callback([this] { action_ = [this] { cmd_stream(); }; });

    auto* rb = orc->add_subcommand("run-bound", "longest common code run of two rotation orbits at a fixed offset");
    common(rb, {"json"}, "json");
    partition_flag(rb);
    rb->add_option("--offset", o_.offset, "offset d (default 2/5)");
    rb->add_option("--precision", o_.precision, "rotation angle denominator bits")->check(CLI::Range(64u, 4096u))->capture_default_str();
    rb->callback([this] { action_ = [this] { cmd_run_bound(); }; });
  }

  // --- plumbing ----------------------------------------------------------

  Json report(const std::string& command, Json config, Json result) const {
    Json j;
    j["tool"] = "rawcode";
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = std::move(config);
    j["result"] = std::move(result);
    return j;
  }

  void emit(const std::string& text) {
    if (o_.output.empty()) {
      out_ << text;
      return;
    }
    std::ofstream f(o_.output, std::ios::binary);
    if (!f) throw InputError("cannot open output file '" + o_.output + "'");
    f << text;
    if (!f) throw InputError("failed writing '" + o_.output + "'");
  }

  void emit(const Json& j) { emit(j.dump(2) + "\n"); }

  IntervalMap system() const { return detail::make_system(o_.system, o_.precision, detail::parse_backend(o_.backend)); }

  Json system_config() const {
    return Json{{"system", o_.system}, {"backend", o_.backend}, {"precision", o_.precision}};
  }

  // Source for simulate/code: explicit --x0 or the seeded sampling policy.
  TrajectorySource source_for(const IntervalMap& map, size_t horizon) const {
    if (o_.x0.empty()) return make_sampled_source(map, SeedSpec{o_.seed, o_.stream_index}, horizon);
    const Rational x0 = detail::parse_flag_rational("--x0", o_.x0);
    if (x0 < 0 || x0 >= 1) throw UsageError("--x0 must lie in [0,1)");
    if (map.backend() == Backend::shift_stream) {
      if (!dyadic_exponent(x0)) {
        if (o_.backend != "auto") throw BackendError("--x0 " + o_.x0 + " is not dyadic; shift-stream needs a dyadic point");
        return TrajectorySource(map.with_backend(Backend::rational), x0);
      }
      return TrajectorySource(map, x0, std::max<size_t>(*dyadic_exponent(x0), horizon + 64));
    }
    return TrajectorySource(map, x0);
  }

  Json point_config(size_t horizon) const {
    Json c = system_config();
    c["x0"] = o_.x0.empty() ? Json(nullptr) : Json(o_.x0);
    c["seed"] = o_.seed;
    c["stream"] = o_.stream_index;
    c["horizon"] = horizon;
    return c;
  }

  // --- commands ----------------------------------------------------------

  void cmd_simulate() {
    const size_t horizon = o_.horizon.value_or(16);
    const IntervalMap map = system();
    TrajectorySource src = source_for(map, horizon);
    const auto orbit = iterate(src, horizon);
    if (o_.format == "csv") {
      std::string s = "t,x\n";
      for (size_t t = 0; t < orbit.size(); ++t) s += std::to_string(t) + "," + to_string(orbit[t]) + "\n";
      emit(s);
      return;
    }
    Json pts = Json::array();
    for (const auto& x : orbit) pts.push_back(to_string(x));
    Json result;
    result["backend"] = to_string(src.map().backend());
    result["trajectory"] = pts;
    emit(report("simulate", point_config(horizon), result));
  }

  void cmd_code() {
    const size_t horizon = o_.horizon.value_or(64);
    const IntervalMap map = system();
    const Partition partition = detail::make_partition(o_.partition);
    const SymbolStream s = encode_trajectory(source_for(map, horizon), partition, horizon);
    if (o_.format == "stream") {
      std::ostringstream os;
      write_symbol_stream(os, s);
      emit(os.str());
    } else if (o_.format == "csv") {
      std::string text = "t,symbol\n";
      for (size_t t = 0; t < s.size(); ++t) text += std::to_string(t) + "," + std::to_string(s[t]) + "\n";
      emit(text);
    } else {
      Json c = point_config(horizon);
      c["partition"] = o_.partition;
      emit(report("code", c, Json{{"alphabet", s.alphabet}, {"symbols", s.symbols}}));
    }
  }

  void cmd_refine() {
    const IntervalMap map = system();
    const Partition partition = detail::make_partition(o_.partition);
    const RefinementTable table = refine(map, partition, o_.order, o_.cap);
    if (o_.format == "csv") {
      std::string s = "word,lo,hi,measure\n";
      for (const auto& c : table.cylinders) {
        std::string w;
        for (size_t i = 0; i < c.word.size(); ++i) w += (i ? " " : "") + std::to_string(c.word[i]);
        for (const auto& p : c.support.parts())
          s += w + "," + to_string(p.lo) + "," + to_string(p.hi) + "," + to_string(c.measure) + "\n";
      }
      emit(s);
      return;
    }
    Json cyl = Json::array();
    for (const auto& c : table.cylinders)
      cyl.push_back(Json{{"word", c.word}, {"support", detail::interval_set_json(c.support)}, {"measure", to_string(c.measure)}});
    Json c = system_config();
    c["partition"] = o_.partition;
    c["n"] = o_.order;
    emit(report("refine", c,
                Json{{"cylinder_count", table.cylinders.size()},
                     {"total_measure", to_string(table.total_measure())},
                     {"cylinders", cyl}}));
  }

  void cmd_coincide() {
    const IntervalMap map = system();
    const Partition partition = detail::make_partition(o_.partition);
    const bool rotation = map.backend() == Backend::rotation_closed_form;
    const std::string sampler_name = o_.sampler.empty() ? (rotation ? "offset" : "independent") : o_.sampler;
    const Sampler sampler = detail::parse_sampler(sampler_name);
    std::optional<Rational> offset;
    std::string offset_text;
    if (sampler == Sampler::offset) {
      offset_text = o_.offset.empty() ? "2/5" : o_.offset;
      offset = detail::parse_flag_rational("--offset", offset_text);
      if (*offset <= 0 || *offset >= 1) throw UsageError("--offset must lie in (0,1)");
    } else if (!o_.offset.empty()) {
      throw UsageError("--offset only applies to the offset sampler");
    }
    const size_t horizon = o_.horizon.value_or(10000);
    if (horizon < o_.window + 1) throw UsageError("--horizon must be at least L + 1");

    CoincidenceQuery q{map, partition, o_.trajectories, o_.window, horizon, o_.samples, o_.seed, sampler, offset};
    const HittingStats stats = hitting_experiment(q, o_.workers);
    if (o_.format == "csv") {
      emit(detail::hitting_csv(stats));
      return;
    }
    Json result = detail::hitting_json(stats);
    // Bernoulli-equivalent baseline: doubling map with a dyadic partition.
    std::optional<unsigned> dyadic_k;
    if (o_.system == "doubling" && sampler == Sampler::independent) {
      if (o_.partition == "binary") dyadic_k = 1;
      else if (o_.partition.rfind("dyadic:", 0) == 0) dyadic_k = static_cast<unsigned>(std::stoul(o_.partition.substr(7)));
    }
    if (dyadic_k && *dyadic_k > 0) {
      const Rational m = doubling_dyadic_mean_t_end(*dyadic_k, o_.trajectories, o_.window);
      result["oracle_mean"] = to_double(m);
      result["oracle_mean_exact"] = to_string(m);
    } else {
      result["oracle_mean"] = nullptr;
    }
    if (rotation && offset) {
      result["run_bound"] = detail::optional_json(rotation_run_bound(map, partition, *offset));
    }

    Json c = system_config();
    c["partition"] = o_.partition;
    c["N"] = o_.trajectories;
    c["L"] = o_.window;
    c["horizon"] = horizon;
    c["samples"] = o_.samples;
    c["seed"] = o_.seed;
    c["sampler"] = sampler_name;
    c["offset"] = offset ? Json(offset_text) : Json(nullptr);
    emit(report("coincide", c, result));
  }

  void cmd_bridge() {
    const size_t horizon = o_.horizon.value_or(100000);
    if (horizon < o_.window + 1) throw UsageError("--horizon must be at least L + 1");
    const Partition aligned = detail::make_bins(o_.bins.empty() ? "8" : o_.bins);
    bool half_aligned = false;
    for (const auto& c : aligned.cuts()) half_aligned = half_aligned || c == make_rational(1, 2);
    if (!half_aligned) throw UsageError("--bins must have a cut at 1/2");

    const BridgeScenarioResult r = bridge_scenario(o_.k, o_.window, o_.samples, horizon, o_.seed, o_.workers);
    if (o_.format == "csv") {
      emit(detail::hitting_csv(r.stats));
      return;
    }
    const IntervalMap map = make_bridge_map(Backend::rational);
    Json result = detail::hitting_json(r.stats);
    result["quadrant_violations"] = r.quadrant_violations;
    result["quadrants_invariant"] = r.quadrants_invariant();
    result["ulam_aligned"] = detail::block_report_json(ergodic_block_report(ulam_matrix(map, aligned)));
    result["ulam_straddling"] = detail::block_report_json(ergodic_block_report(ulam_matrix(map, Partition::bridge(o_.k))));

    Json c;
    c["system"] = "bridge";
    c["partition"] = "bridge:" + std::to_string(o_.k);
    c["k"] = o_.k;
    c["N"] = 2;
    c["L"] = o_.window;
    c["horizon"] = horizon;
    c["samples"] = o_.samples;
    c["seed"] = o_.seed;
    c["sampler"] = "cross-halves";
    c["bins"] = o_.bins.empty() ? "8" : o_.bins;
    emit(report("bridge", c, result));
  }

  void cmd_mixing() {
    const IntervalMap map = system();
    const IntervalSet a = detail::as_usage([&] { return parse_interval_set(o_.set_a); });
    const IntervalSet b = detail::as_usage([&] { return parse_interval_set(o_.set_b); });
    const MixingMode mode = detail::parse_mode(o_.mode);
    MixingOptions opt;
    opt.mc_samples = o_.mc_samples;
    opt.seed = o_.seed;
    const MixingSeries s = weak_mixing_series(map, a, b, o_.terms, mode, opt);

    if (o_.format == "csv") {
      std::string text = "n,term,W_n,term_exact,W_n_exact\n";
      std::ostringstream os;
      os.precision(17);
      os << text;
      for (size_t i = 0; i < s.terms.size(); ++i) {
        const auto& t = s.terms[i];
        os << (i + 1) << ',' << t.value << ',' << s.cesaro[i] << ',' << (t.exact ? to_string(*t.exact) : "") << ','
           << (s.cesaro_exact[i] ? to_string(*s.cesaro_exact[i]) : "") << '\n';
      }
      emit(os.str());
      return;
    }
    Json rows = Json::array();
    for (size_t i = 0; i < s.terms.size(); ++i) {
      const auto& t = s.terms[i];
      Json row{{"k", t.k}, {"term", t.value}, {"term_exact", t.exact ? Json(to_string(*t.exact)) : Json(nullptr)},
               {"W", s.cesaro[i]}, {"W_exact", s.cesaro_exact[i] ? Json(to_string(*s.cesaro_exact[i])) : Json(nullptr)}};
      if (t.sampled) row["ci"] = Json::array({t.sampled->lo, t.sampled->hi});
      rows.push_back(std::move(row));
    }
    Json result;
    result["measure_A"] = to_string(a.measure());
    result["measure_B"] = to_string(b.measure());
    result["final_W"] = s.cesaro.empty() ? Json(nullptr) : Json(s.cesaro.back());
    const auto fe = s.final_exact();
    result["final_W_exact"] = fe ? Json(to_string(*fe)) : Json(nullptr);
    result["terms"] = rows;

    Json c = system_config();
    c["A"] = o_.set_a;
    c["B"] = o_.set_b;
    c["n"] = o_.terms;
    c["mode"] = o_.mode;
    c["mc_samples"] = o_.mc_samples;
    c["seed"] = o_.seed;
    emit(report("mixing", c, result));
  }

  void cmd_ulam() {
    const IntervalMap map = system();
    const std::string bins_spec = o_.bins.empty() ? "8" : o_.bins;
    const UlamModel model = ulam_matrix(map, detail::make_bins(bins_spec));
    if (o_.format == "matrix") {
      std::ostringstream os;
      write_matrix(os, model.matrix);
      emit(os.str());
      return;
    }
    if (o_.format == "csv") {
      std::string text;
      for (const auto& row : model.matrix.rows()) {
        for (size_t j = 0; j < row.size(); ++j) text += (j ? "," : "") + to_string(row[j]);
        text += '\n';
      }
      emit(text);
      return;
    }
    Json c = system_config();
    c["bins"] = bins_spec;
    emit(report("ulam", c,
                Json{{"size", model.matrix.size()},
                     {"matrix", detail::matrix_json(model.matrix)},
                     {"blocks", detail::block_report_json(ergodic_block_report(model))}}));
  }

  void cmd_audit() {
    if (o_.streams.size() < 2) throw UsageError("audit needs at least two streams");
    const size_t L = o_.audit_window;
    std::vector<SymbolStream> streams;
    for (const auto& path : o_.streams) streams.push_back(read_symbol_stream_file(path, o_.alphabet));
    size_t h = streams[0].size();
    for (const auto& s : streams) h = std::min(h, s.size());
    for (size_t i = 0; i < streams.size(); ++i)
      if (streams[i].size() != h) {
        warn("truncating '" + o_.streams[i] + "' from " + std::to_string(streams[i].size()) + " to " + std::to_string(h) +
             " symbols");
        streams[i].symbols.resize(h);
      }

    const auto agree = agreement_stream(streams);
    AgreementTracker tracker(L);
    for (bool a : agree) tracker.push(a);
    const size_t observed = count_long_runs(agree, L);

    std::vector<size_t> pooled(o_.alphabet, 0);
    Json per_stream = Json::array();
    for (size_t i = 0; i < streams.size(); ++i) {
      std::vector<size_t> counts(o_.alphabet, 0);
      for (Symbol v : streams[i].symbols) ++counts[v];
      Json freq = Json::array();
      for (size_t j = 0; j < counts.size(); ++j) {
        pooled[j] += counts[j];
        freq.push_back(h ? static_cast<double>(counts[j]) / static_cast<double>(h) : 0.0);
      }
      per_stream.push_back(Json{{"file", o_.streams[i]}, {"counts", counts}, {"frequencies", freq}});
    }

    Json result;
    result["length"] = h;
    result["streams"] = per_stream;
    result["agreements"] = tracker.agreements();
    result["agreement_fraction"] = h ? static_cast<double>(tracker.agreements()) / static_cast<double>(h) : 0.0;
    result["max_run"] = tracker.max_run();
    result["first_window_t0"] = detail::optional_json(tracker.t0());
    result["observed_long_runs"] = observed;
    const size_t total = h * streams.size();
    if (total > 0) {
      std::vector<Rational> p;
      for (size_t c : pooled) p.push_back(make_rational(static_cast<long>(c), total));
      const Rational qc = coincidence_rate(BernoulliSpec(p), streams.size());
      const Rational expected = expected_long_runs(qc, L, h);
      result["fitted_coincidence_rate"] = to_double(qc);
      result["expected_long_runs"] = to_double(expected);
      result["ratio"] = expected > 0 ? Json(static_cast<double>(observed) / to_double(expected)) : Json(nullptr);
    } else {
      result["fitted_coincidence_rate"] = nullptr;
      result["expected_long_runs"] = 0.0;
      result["ratio"] = nullptr;
    }
    emit(report("audit", Json{{"streams", o_.streams}, {"L", L}, {"alphabet", o_.alphabet}}, result));
  }

  void cmd_run_waiting() {
    const Rational q = detail::parse_flag_rational("--q", o_.q);
    if (q <= 0 || q >= 1) throw UsageError("--q must lie strictly between 0 and 1");
    const Rational closed = run_waiting_mean_closed_form(q, o_.window);
    const Rational chain = run_waiting_mean_chain(q, o_.window);
    std::optional<RunWaitingDistribution<double>> dist;
    if (o_.horizon) dist = run_waiting<double>(q, o_.window, *o_.horizon);
    if (o_.format == "csv") {
      if (!dist) throw UsageError("csv output lists the pmf and needs --horizon");
      std::ostringstream os;
      os.precision(17);
      os << "t,probability\n";
      for (size_t t = 1; t <= dist->pmf.size(); ++t) os << t << ',' << dist->pmf[t - 1] << '\n';
      emit(os.str());
      return;
    }
    Json result{{"mean", to_string(chain)},
                {"mean_closed_form", to_string(closed)},
                {"mean_value", to_double(chain)},
                {"methods_agree", closed == chain}};
    if (dist) {
      result["pmf"] = dist->pmf;
      result["deficit"] = dist->deficit;
    }
    Json c{{"q", o_.q}, {"L", o_.window}, {"horizon", detail::optional_json(o_.horizon)}};
    emit(report("oracle run-waiting", c, result));
  }

  void cmd_window() {
    const BernoulliSpec spec = detail::as_usage([&] { return BernoulliSpec(detail::parse_rational_list("--probs", o_.probs)); });
    const auto word = detail::parse_word(o_.word);
    for (Symbol s : word)
      if (s >= spec.alphabet()) throw UsageError("--word symbol " + std::to_string(s) + " outside the alphabet");
    const Rational p = window_match_probability(spec, word);
    emit(report("oracle window", Json{{"probs", o_.probs}, {"word", o_.word}},
                Json{{"probability", to_string(p)}, {"value", to_double(p)}}));
  }

  void cmd_rate() {
    const BernoulliSpec spec = detail::as_usage([&] { return BernoulliSpec(detail::parse_rational_list("--probs", o_.probs)); });
    const Rational qc = coincidence_rate(spec, o_.trajectories);
    Json result{{"rate", to_string(qc)}, {"value", to_double(qc)}};
    if (qc > 0 && qc < 1) result["mean_t_end"] = to_string(run_waiting_mean_closed_form(qc, o_.window));
    emit(report("oracle rate", Json{{"probs", o_.probs}, {"N", o_.trajectories}, {"L", o_.window}}, result));
  }

  void cmd_primitive() {
    const StochasticMatrix m = read_matrix_file(o_.matrix);
    Json result = detail::block_report_json(ergodic_block_report(m));
    result["doubly_stochastic"] = m.doubly_stochastic();
    emit(report("oracle primitive", Json{{"matrix", o_.matrix}}, result));
  }

  void cmd_stream() {
    const SeedSpec seed{o_.seed, o_.stream_index};
    SymbolStream s;
    if (!o_.matrix.empty()) {
      StochasticMatrix m = read_matrix_file(o_.matrix);
      std::vector<Rational> init = o_.probs.empty() ? stationary_distribution(m)
                                                    : detail::parse_rational_list("--probs", o_.probs);
      s = markov_stream(MarkovChainSpec(std::move(m), std::move(init)), seed, o_.length);
    } else {
      if (o_.probs.empty()) throw UsageError("stream needs --probs or --matrix");
      const BernoulliSpec spec = detail::as_usage([&] { return BernoulliSpec(detail::parse_rational_list("--probs", o_.probs)); });
      s = bernoulli_stream(spec, seed, o_.length);
    }
    if (o_.format == "stream") {
      std::ostringstream os;
      write_symbol_stream(os, s);
      emit(os.str());
      return;
    }
    Json c{{"probs", o_.probs}, {"matrix", o_.matrix}, {"length", o_.length}, {"seed", o_.seed}, {"stream", o_.stream_index}};
    emit(report("oracle stream", c, Json{{"alphabet", s.alphabet}, {"symbols", s.symbols}}));
  }

  void cmd_run_bound() {
    const std::string offset_text = o_.offset.empty() ? "2/5" : o_.offset;
    const Rational d = detail::parse_flag_rational("--offset", offset_text);
    if (d <= 0 || d >= 1) throw UsageError("--offset must lie in (0,1)");
    const IntervalMap rot = make_rotation(o_.precision);
    const Partition partition = detail::make_partition(o_.partition);
    const auto bound = rotation_run_bound(rot, partition, d);
    emit(report("oracle run-bound", Json{{"partition", o_.partition}, {"offset", offset_text}, {"precision", o_.precision}},
                Json{{"run_bound", detail::optional_json(bound)}, {"angle", to_string(*rot.rotation_angle())}}));
  }

  std::ostream& out_;
  std::ostream& err_;
  Options o_;
  std::function<void()> action_;
  std::map<const CLI::App*, std::string> default_format_;
};

/// Entry point shared by the executable and the tests. Returns the exit code.
inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Runner r(out, err);
  return r.run(argc, argv);
}

} // namespace rawcode::cli
