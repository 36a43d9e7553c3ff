#include "mtjsnn/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mtjsnn/error.hpp"

namespace mtjsnn {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

// Object view that records which keys were read, so that leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string key_path(const std::string& key) const { return join(path_, key); }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(key_path(key), "missing required key");
    return j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? as_number(raw(key), key_path(key)) : fallback;
  }

  double positive(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) fail(key_path(key), "must be > 0");
    return x;
  }

  long long integer(const std::string& key, long long fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(key_path(key), "expected an integer");
    return v.get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(key_path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) fail(key_path(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) { return as_numbers(raw(key), key_path(key)); }

  Section child(const std::string& key) { return Section(raw(key), key_path(key)); }

  void finish() const {
    for (const auto& item : j_.items())
      if (!used_.count(item.key())) fail(key_path(item.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void check(const std::vector<std::string>& violations, const std::string& path) {
  if (!violations.empty()) fail(path, violations.front());
}

TlrParams read_tlr(Section s, TlrParams p) {
  p.i_threshold = s.number("i_threshold", p.i_threshold);
  p.q_switch = s.number("q_switch", p.q_switch);
  p.latency_floor = s.number("latency_floor", p.latency_floor);
  p.spike_amplitude = s.number("spike_amplitude", p.spike_amplitude);
  p.spike_duration = s.number("spike_duration", p.spike_duration);
  p.t_refractory = s.number("t_refractory", p.t_refractory);
  p.rel_refraction_beta = s.number("rel_refraction_beta", p.rel_refraction_beta);
  p.rel_refraction_tau = s.number("rel_refraction_tau", p.rel_refraction_tau);
  s.finish();
  check(p.violations(), s.path());
  return p;
}

MacrospinParams read_macrospin(Section s, MacrospinParams p) {
  p.gamma = s.number("gamma", p.gamma);
  p.alpha = s.number("alpha", p.alpha);
  p.h_easy = s.number("h_easy", p.h_easy);
  p.h_demag = s.number("h_demag", p.h_demag);
  p.stt_coefficient = s.number("stt_coefficient", p.stt_coefficient);
  if (s.has("polarizer")) {
    const auto v = s.numbers("polarizer");
    if (v.size() != 3) fail(s.key_path("polarizer"), "expected 3 components");
    p.polarizer = {v[0], v[1], v[2]};
  }
  p.r_parallel = s.number("r_parallel", p.r_parallel);
  p.r_antiparallel = s.number("r_antiparallel", p.r_antiparallel);
  p.v_dd = s.number("v_dd", p.v_dd);
  p.transistor_k = s.number("transistor_k", p.transistor_k);
  p.transistor_vt = s.number("transistor_vt", p.transistor_vt);
  s.finish();
  check(p.violations(), s.path());
  return p;
}

SpikeShape read_shape(Section s) {
  SpikeShape shape;
  shape.amplitude = s.number("amplitude", shape.amplitude);
  shape.duration = s.positive("duration", shape.duration);
  s.finish();
  return shape;
}

SimConfig read_sim(Section s) {
  SimConfig sim;
  sim.dt = s.positive("dt", sim.dt);
  sim.horizon = s.positive("horizon", sim.horizon);
  s.finish();
  check(sim.violations(), s.path());
  return sim;
}

std::map<std::string, std::vector<double>> read_stimulus(Section s, const json& j) {
  std::map<std::string, std::vector<double>> stim;
  for (const auto& item : j.items()) stim[item.key()] = s.numbers(item.key());
  s.finish();
  return stim;
}

Network read_network(Section s) {
  Network net;
  if (s.has("source_shape")) net.source_shape = read_shape(s.child("source_shape"));
  TlrParams tlr_defaults;
  MacrospinParams macrospin_defaults;
  if (s.has("tlr_defaults")) tlr_defaults = read_tlr(s.child("tlr_defaults"), tlr_defaults);
  if (s.has("macrospin_defaults"))
    macrospin_defaults = read_macrospin(s.child("macrospin_defaults"), macrospin_defaults);

  if (s.has("sources")) {
    const json& arr = s.raw("sources");
    if (!arr.is_array()) fail(s.key_path("sources"), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section src(arr[i], s.key_path("sources") + "[" + std::to_string(i) + "]");
      Source out;
      out.id = src.string("id", "");
      if (out.id.empty()) fail(src.key_path("id"), "missing or empty");
      if (src.has("spikes")) out.spikes = src.numbers("spikes");
      src.finish();
      net.sources.push_back(out);
    }
  }

  const json& neurons = s.raw("neurons");
  if (!neurons.is_array()) fail(s.key_path("neurons"), "expected an array");
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    Section n(neurons[i], s.key_path("neurons") + "[" + std::to_string(i) + "]");
    NeuronSpec spec;
    spec.id = n.string("id", "");
    if (spec.id.empty()) fail(n.key_path("id"), "missing or empty");
    try {
      spec.backend = backend_from_string(n.string("backend", "tlr"));
    } catch (const InvalidInput& e) {
      fail(n.key_path("backend"), e.what());
    }
    spec.tlr = n.has("tlr") ? read_tlr(n.child("tlr"), tlr_defaults) : tlr_defaults;
    spec.macrospin = n.has("macrospin") ? read_macrospin(n.child("macrospin"), macrospin_defaults) : macrospin_defaults;
    spec.initial_tilt_deg = n.number("initial_tilt_deg", spec.initial_tilt_deg);
    n.finish();
    net.neurons.push_back(spec);
  }

  if (s.has("synapses")) {
    const json& arr = s.raw("synapses");
    if (!arr.is_array()) fail(s.key_path("synapses"), "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section syn(arr[i], s.key_path("synapses") + "[" + std::to_string(i) + "]");
      Synapse out;
      out.pre = syn.string("pre", "");
      out.post = syn.string("post", "");
      out.weight = as_number(syn.raw("weight"), syn.key_path("weight"));
      syn.finish();
      net.synapses.push_back(out);
    }
  }
  s.finish();
  if (auto v = validate_topology(net); !v.empty()) fail(s.path(), v.front().element + ": " + v.front().message);
  return net;
}

WeightRange read_range(const json& v, const std::string& path) {
  const auto r = as_numbers(v, path);
  if (r.size() != 2 || r[0] > r[1]) fail(path, "expected [lo, hi] with lo <= hi");
  return {r[0], r[1]};
}

TrainConfig read_train(Section s) {
  TrainConfig t;
  t.eta = s.number("eta", t.eta);
  if (t.eta < 0.0) fail(s.key_path("eta"), "must be >= 0");
  t.fd_epsilon = s.positive("fd_epsilon", t.fd_epsilon);
  const long long epochs = s.integer("max_epochs", t.max_epochs);
  if (epochs < 1 || epochs > 100000000) fail(s.key_path("max_epochs"), "must be in [1, 1e8]");
  t.max_epochs = static_cast<int>(epochs);
  t.tol = s.positive("tol", t.tol);
  if (s.has("no_spike_penalty_time")) t.no_spike_penalty_time = s.positive("no_spike_penalty_time", 0.0);
  const long long seed = s.integer("seed", static_cast<long long>(t.seed));
  if (seed < 0) fail(s.key_path("seed"), "must be >= 0");
  t.seed = static_cast<std::uint64_t>(seed);
  const long long threads = s.integer("threads", t.threads);
  if (threads < 1 || threads > 1024) fail(s.key_path("threads"), "must be in [1, 1024]");
  t.threads = static_cast<unsigned>(threads);
  if (s.has("init_range")) t.init_range = read_range(s.raw("init_range"), s.key_path("init_range"));
  if (s.has("init_ranges")) {
    Section ranges = s.child("init_ranges");
    for (const auto& item : s.raw("init_ranges").items())
      t.init_ranges[item.key()] = read_range(ranges.raw(item.key()), ranges.key_path(item.key()));
    ranges.finish();
  }
  s.finish();
  return t;
}

EncodingConfig read_encoding(Section s) {
  EncodingConfig enc;
  try {
    enc.kind = encoding_from_string(s.string("kind", to_string(enc.kind)));
  } catch (const InvalidInput& e) {
    fail(s.key_path("kind"), e.what());
  }
  enc.bias_time = s.number("bias_time", enc.bias_time);
  enc.one_time = s.number("one_time", enc.one_time);
  enc.zero_time = s.number("zero_time", enc.zero_time);
  s.finish();
  check(enc.violations(), s.path());
  return enc;
}

XorArch read_xor(Section s) {
  XorArch arch;
  if (s.has("hidden")) arch.hidden = read_tlr(s.child("hidden"), arch.hidden);
  if (s.has("output")) arch.output = read_tlr(s.child("output"), arch.output);
  arch.bias_to_output = s.boolean("bias_to_output", arch.bias_to_output);
  if (s.has("source_shape")) arch.source_shape = read_shape(s.child("source_shape"));
  if (s.has("encoding")) arch.encoding = read_encoding(s.child("encoding"));
  if (s.has("weights")) {
    Section w = s.child("weights");
    for (const auto& item : s.raw("weights").items())
      arch.weights[item.key()] = as_number(w.raw(item.key()), w.key_path(item.key()));
    w.finish();
  }
  s.finish();
  try {
    (void)build_xor_network(arch);
  } catch (const std::exception& e) {
    fail(s.path(), e.what());
  }
  return arch;
}

SweepConfig read_sweep(Section s) {
  SweepConfig sw;
  sw.backend = s.string("backend", sw.backend);
  if (sw.backend != "tlr" && sw.backend != "macrospin" && sw.backend != "calibrated")
    fail(s.key_path("backend"), "expected tlr, macrospin or calibrated");
  if (s.has("drives")) sw.drives = s.numbers("drives");
  if (s.has("tlr")) sw.tlr = read_tlr(s.child("tlr"), sw.tlr);
  if (s.has("macrospin")) sw.macrospin = read_macrospin(s.child("macrospin"), sw.macrospin);
  if (s.has("probe")) {
    Section p = s.child("probe");
    sw.probe.dt = p.positive("dt", sw.probe.dt);
    if (sw.probe.dt > 0.01) fail(p.key_path("dt"), "must be <= 0.01 ns");
    sw.probe.horizon = p.positive("horizon", sw.probe.horizon);
    sw.probe.tilt_deg = p.number("tilt_deg", sw.probe.tilt_deg);
    p.finish();
  }
  if (s.has("calibration_grid")) sw.calibration_grid = s.numbers("calibration_grid");
  s.finish();
  return sw;
}

}  // namespace

ConfigDocument parse_config(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }

  ConfigDocument doc;
  Section s(root, "");
  if (!s.has("schema_version")) fail("schema_version", "missing required key");
  const long long version = s.integer("schema_version", 0);
  if (version != kSchemaVersion)
    fail("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                               std::to_string(kSchemaVersion) + ")");
  doc.schema_version = static_cast<int>(version);
  if (s.has("sim")) doc.sim = read_sim(s.child("sim"));
  if (s.has("network")) doc.network = read_network(s.child("network"));
  if (s.has("output")) doc.output = s.string("output", "");
  if (s.has("dataset")) {
    const json& arr = s.raw("dataset");
    if (!arr.is_array()) fail("dataset", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section row(arr[i], "dataset[" + std::to_string(i) + "]");
      Sample sample;
      sample.stimulus = read_stimulus(row.child("stimulus"), row.raw("stimulus"));
      sample.target = as_number(row.raw("target"), row.key_path("target"));
      row.finish();
      doc.dataset.push_back(std::move(sample));
    }
  }
  if (s.has("train")) doc.train = read_train(s.child("train"));
  if (s.has("xor")) doc.xor_arch = read_xor(s.child("xor"));
  if (s.has("sweep")) doc.sweep = read_sweep(s.child("sweep"));
  s.finish();

  if (doc.network) {
    if (doc.output && !doc.network->find_neuron(*doc.output)) fail("output", "'" + *doc.output + "' is not a neuron");
    for (std::size_t i = 0; i < doc.dataset.size(); ++i)
      for (const auto& [id, spikes] : doc.dataset[i].stimulus)
        if (!doc.network->find_source(id))
          fail("dataset[" + std::to_string(i) + "].stimulus." + id, "unknown source");
  }
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](std::string_view tok) {
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(x))
      throw ConfigError("--grid: cannot parse '" + std::string(tok) + "' as a number");
    return x;
  };
  std::vector<std::string_view> parts;
  const std::string_view sv(text);
  const char sep = sv.find(':') != std::string_view::npos ? ':' : ',';
  std::size_t start = 0;
  while (true) {
    const auto pos = sv.find(sep, start);
    parts.push_back(sv.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  std::vector<double> grid;
  if (sep == ':') {
    if (parts.size() != 3) throw ConfigError("--grid: expected start:stop:count");
    const double lo = number(parts[0]);
    const double hi = number(parts[1]);
    const double n = number(parts[2]);
    if (n < 1 || n != std::floor(n) || n > 1e6) throw ConfigError("--grid: count must be a positive integer");
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i)
      grid.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  } else {
    for (const auto& p : parts) grid.push_back(number(p));
  }
  return grid;
}

}  // namespace mtjsnn
