#include <gtest/gtest.h>

#include <cmath>

#include "mtjsnn/error.hpp"
#include "mtjsnn/xor_bench.hpp"
#include "reference_weights.hpp"

using namespace mtjsnn;

namespace {

XorExperiment shipped(std::uint64_t seed) {
  XorExperiment exp;
  exp.train.eta = 0.5;
  exp.train.seed = seed;
  exp.train.init_ranges = {{"A->i1", {5.2, 6.2}},    {"B->i1", {5.2, 6.2}},    {"bias->i1", {-5.0, -4.2}},
                           {"A->i2", {-5.45, -5.0}}, {"B->i2", {-5.45, -5.0}}, {"bias->i2", {6.8, 7.6}},
                           {"i1->o1", {5.5, 8.5}},   {"i2->o1", {5.5, 8.5}},   {"bias->o1", {-0.5, 0.5}}};
  return exp;
}

Network reference_network() { return build_xor_network(XorArch{.weights = testing_weights::reference()}); }

const XorBenchResult& trained_seed_one() {
  static const XorBenchResult result = run_xor_bench(shipped(1));
  return result;
}

}  // namespace

TEST(BuildXor, CountsAndValidation) {
  const Network net = build_xor_network(XorArch{});
  EXPECT_EQ(net.sources.size(), 3u);
  EXPECT_EQ(net.neurons.size(), 3u);
  EXPECT_EQ(net.synapses.size(), 9u);
  EXPECT_TRUE(validate_topology(net).empty());
  XorArch no_bias_out;
  no_bias_out.bias_to_output = false;
  const Network smaller = build_xor_network(no_bias_out);
  EXPECT_EQ(smaller.synapses.size(), 8u);
  EXPECT_FALSE(smaller.find_synapse("bias", "o1"));
  EXPECT_TRUE(validate_topology(smaller).empty());
}

TEST(BuildXor, RejectsWeightForMissingEdge) {
  XorArch arch;
  arch.bias_to_output = false;
  arch.weights["bias->o1"] = 1.0;
  EXPECT_THROW(build_xor_network(arch), InvalidInput);
  arch.weights = {{"A->o1", 1.0}};
  EXPECT_THROW(build_xor_network(arch), InvalidInput);
}

TEST(XorRows, TruthTableAndTargets) {
  const auto rows = xor_rows();
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.bias, 1);
    EXPECT_EQ(r.target_bit, r.a ^ r.b);
    EXPECT_EQ(r.target_time, r.target_bit ? 2.5 : 2.0);
  }
  EXPECT_THROW(make_xor_row(2, 0), InvalidInput);
}

TEST(Encode, PresenceEncoding) {
  const EncodingConfig enc;
  auto s00 = encode_inputs(make_xor_row(0, 0), enc);
  EXPECT_TRUE(s00["A"].empty());
  EXPECT_TRUE(s00["B"].empty());
  EXPECT_EQ(s00["bias"], std::vector<double>{0.0});
  auto s10 = encode_inputs(make_xor_row(1, 0), enc);
  EXPECT_EQ(s10["A"], std::vector<double>{0.0});
  EXPECT_TRUE(s10["B"].empty());
  EXPECT_EQ(s10["bias"], std::vector<double>{0.0});
  auto s11 = encode_inputs(make_xor_row(1, 1), enc);
  EXPECT_EQ(s11["A"], std::vector<double>{0.0});
  EXPECT_EQ(s11["B"], std::vector<double>{0.0});
}

TEST(Encode, TimingEncoding) {
  EncodingConfig enc;
  enc.kind = Encoding::timing;
  enc.one_time = 0.1;
  enc.zero_time = 0.6;
  enc.bias_time = 0.2;
  auto s = encode_inputs(make_xor_row(1, 0), enc);
  EXPECT_EQ(s["A"], std::vector<double>{0.1});
  EXPECT_EQ(s["B"], std::vector<double>{0.6});
  EXPECT_EQ(s["bias"], std::vector<double>{0.2});
  EXPECT_EQ(encoding_from_string("timing"), Encoding::timing);
  EXPECT_THROW(encoding_from_string("rate"), InvalidInput);
}

TEST(Decode, NearestTargetWithStrictTie) {
  EXPECT_EQ(decode_output(2.0), 0);
  EXPECT_EQ(decode_output(2.52), 1);
  EXPECT_EQ(decode_output(1.1), 0);
  EXPECT_EQ(decode_output(4.9), 1);
  EXPECT_FALSE(decode_output(std::nullopt));
  EXPECT_FALSE(decode_output(2.25));
  EXPECT_FALSE(decode_output(NAN));
  EXPECT_EQ(decode_output(std::nextafter(2.25, 0.0)), 0);
  EXPECT_EQ(decode_output(std::nextafter(2.25, 3.0)), 1);
}

TEST(Decode, IdempotentOnDecodedTimes) {
  for (double t = 0.0; t <= 5.0; t += 0.01) {
    const auto bit = decode_output(t);
    if (!bit) continue;
    EXPECT_EQ(decode_output(*bit ? kTimeOne : kTimeZero), bit);
  }
}

TEST(Eval, ReferenceWeightsSolveXor) {
  const XorReport rep = run_xor_eval(reference_network(), SimConfig{});
  ASSERT_EQ(rep.rows.size(), 4u);
  const int expected[] = {0, 1, 1, 0};
  for (int k = 0; k < 4; ++k) {
    ASSERT_TRUE(rep.rows[k].decoded);
    EXPECT_EQ(*rep.rows[k].decoded, expected[k]);
    EXPECT_TRUE(rep.rows[k].pass);
  }
  EXPECT_NEAR(*rep.rows[3].onset, 2.0, 0.05);
  EXPECT_TRUE(rep.threshold_gate);
  EXPECT_TRUE(rep.latency_shift);
  EXPECT_TRUE(rep.refraction);
  EXPECT_TRUE(rep.diagnostics.empty());
  EXPECT_EQ(rep.traces.size(), 4u);
}

TEST(Eval, SilentNetworkGivesWellFormedFailingReport) {
  const XorReport rep = run_xor_eval(build_xor_network(XorArch{}), SimConfig{});
  ASSERT_EQ(rep.rows.size(), 4u);
  for (const auto& r : rep.rows) {
    EXPECT_FALSE(r.onset);
    EXPECT_FALSE(r.decoded);
    EXPECT_FALSE(r.pass);
  }
  EXPECT_FALSE(rep.rows_pass());
  EXPECT_FALSE(rep.threshold_gate);
  EXPECT_FALSE(rep.latency_shift);
  EXPECT_FALSE(rep.refraction);
  EXPECT_FALSE(rep.diagnostics.empty());
}

TEST(Eval, RequiresXorNeurons) {
  Network net;
  net.neurons.push_back({.id = "o1"});
  EXPECT_THROW(run_xor_eval(net, SimConfig{}), InvalidInput);
}

TEST(Bench, ShippedSeedTrainsToXor) {
  const auto& r = trained_seed_one();
  EXPECT_EQ(r.training.status, TrainStatus::converged);
  EXPECT_TRUE(r.report.rows_pass());
  EXPECT_TRUE(r.report.mechanisms_pass());
}

TEST(Bench, OutputFiresOncePerRowAndMatchesIsolatedReplay) {
  const auto& r = trained_seed_one();
  const TlrParams& o1 = r.training.net.find_neuron("o1")->tlr;
  const double dt = SimConfig{}.dt;
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(r.report.rows[k].onsets.at("o1").size(), 1u);
    // Replay o1 alone on its recorded drive.
    const auto& drive = r.report.traces[k].signal("o1.drive");
    const auto replay = tlr_simulate_onsets(
        o1, [&](double t) { return drive[static_cast<std::size_t>(t / dt + 0.5)]; }, dt, SimConfig{}.horizon);
    ASSERT_FALSE(replay.empty());
    EXPECT_EQ(replay.front(), *r.report.rows[k].onset);
  }
}

TEST(Bench, Deterministic) {
  const auto a = run_xor_bench(shipped(2));
  const auto b = run_xor_bench(shipped(2));
  ASSERT_EQ(a.training.history.epochs.size(), b.training.history.epochs.size());
  EXPECT_EQ(a.training.history.epochs.back().weights, b.training.history.epochs.back().weights);
  EXPECT_EQ(a.report.rows[1].onset, b.report.rows[1].onset);
}

TEST(Ablation, RefractionOffBreaksOnlyTheRefractionCheck) {
  Network net = trained_seed_one().training.net;
  for (auto& n : net.neurons)
    if (n.id == "o1") n.tlr.t_refractory = 0.0;
  const XorReport rep = run_xor_eval(net, SimConfig{});
  EXPECT_FALSE(rep.refraction);
  EXPECT_GT(rep.rows[1].onsets.at("o1").size(), 1u);
  EXPECT_TRUE(rep.rows[0].pass);
  EXPECT_TRUE(rep.rows[2].pass);
}

TEST(Ablation, RaisedBiasBreaksTheThresholdGate) {
  Network net = trained_seed_one().training.net;
  for (auto& s : net.synapses)
    if (s.pre == "bias" && s.post != "o1") s.weight += 8.0;
  const XorReport rep = run_xor_eval(net, SimConfig{});
  EXPECT_FALSE(rep.threshold_gate);
  EXPECT_FALSE(rep.rows[0].onsets.at("i1").empty());
  EXPECT_FALSE(rep.rows[0].onsets.at("i2").empty());
}

TEST(NegativeControl, NoSingleNeuronFiringPatternRealizesXor) {
  // One TLR neuron fed directly by A, B and bias. Its fire / no-fire pattern
  // over the four rows is a linear threshold of the inputs, so XOR must never
  // appear, whatever the weights.
  const std::vector<double> grid{-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0};
  int patterns_seen = 0;
  std::vector<bool> seen(16, false);
  for (double wa : grid)
    for (double wb : grid)
      for (double wbias : grid) {
        Network net;
        for (const auto& id : {"A", "B", "bias"}) net.sources.push_back({id, {}});
        net.neurons.push_back({.id = "n"});
        net.synapses = {{"A", "n", wa}, {"B", "n", wb}, {"bias", "n", wbias}};
        int pattern = 0;
        for (const auto& row : xor_rows()) {
          apply_stimulus(net, encode_inputs(row, {}));
          pattern = pattern * 2 + (simulate_first_onset(net, SimConfig{}, "n") ? 1 : 0);
        }
        ASSERT_NE(pattern, 0b0110) << wa << " " << wb << " " << wbias;
        ASSERT_NE(pattern, 0b1001) << wa << " " << wb << " " << wbias;
        if (!seen[pattern]) ++patterns_seen;
        seen[pattern] = true;
      }
  // The search space is rich enough to realize AND, OR, NAND-like patterns.
  EXPECT_GE(patterns_seen, 8);
}

TEST(PostOnsetExcess, MeasuresResidualDrive) {
  const XorReport rep = run_xor_eval(reference_network(), SimConfig{});
  const TlrParams o1;
  const auto excess01 = post_onset_excess(rep.traces[1], o1);
  ASSERT_TRUE(excess01);
  EXPECT_GE(*excess01, o1.q_switch);
  const XorReport silent = run_xor_eval(build_xor_network(XorArch{}), SimConfig{});
  EXPECT_FALSE(post_onset_excess(silent.traces[1], o1));
}
