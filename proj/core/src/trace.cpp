#include "cascadelab/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "cascadelab/errors.hpp"
#include "json.hpp"

namespace cascadelab {

namespace {

using nlohmann::json;

// Hash stream tags for the deterministic temperature-0 draws.
enum : std::uint64_t {
  kTierStream = 1,
  kCorrectStream = 2,
  kAnswerStream = 3,
  kInputTokStream = 4,
  kOutputTokStream = 5,
  kTextStream = 6,
};

constexpr std::array<std::string_view, 16> kEasyVocab = {
    "sum",  "add", "plus", "count", "apple", "pen", "cup", "ball",
    "two",  "five", "box", "kid",   "toy",   "cat", "dog", "egg"};

constexpr std::array<std::string_view, 16> kHardVocab = {
    "quotient", "polynomial", "derivative", "factorial",
    "congruent", "integral",  "logarithm",  "asymptote",
    "vertex",    "binomial",  "theorem",    "modulus",
    "tangent",   "matrix",    "prime",      "radical"};

constexpr int kMarkerWords = 6;

std::int64_t record_key(int question_id, int arm_id, int sample_index) {
  return (static_cast<std::int64_t>(question_id) << 24) |
         (static_cast<std::int64_t>(arm_id) << 16) |
         static_cast<std::int64_t>(sample_index);
}

double hash_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t a,
                   std::uint64_t b) {
  double u1 = rng::hash_unit({seed, stream, a, b, 0});
  if (u1 <= 0.0) u1 = 0.5;
  const double u2 = rng::hash_unit({seed, stream, a, b, 1});
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double lognormal_from_normal(double mean, double sigma, double z) {
  return std::exp(std::log(mean) - 0.5 * sigma * sigma + sigma * z);
}

int draw_distractor(const SynthModel& synth, double unit) {
  const rng::DiscreteSampler zipf(
      rng::zipf_weights(synth.distractor_count, synth.zipf_exponent));
  return 1 + zipf.sample(unit);
}

double arm_probability(const SynthModel& synth, int arm_id, Tier tier) {
  const ArmSynthParams& p = synth.arms[static_cast<std::size_t>(arm_id)];
  return tier == Tier::Easy ? p.p_easy : p.p_hard;
}

QueryRecord synth_temperature0(const TraceSet& trace, const Question& q,
                               int arm_id) {
  const SynthModel& synth = *trace.synth();
  const ArmSpec& arm = trace.arms()[static_cast<std::size_t>(arm_id)];
  const ArmSynthParams& params = synth.arms[static_cast<std::size_t>(arm_id)];
  const auto qid = static_cast<std::uint64_t>(q.question_id);
  const auto aid = static_cast<std::uint64_t>(arm_id);

  QueryRecord rec;
  rec.question_id = q.question_id;
  rec.arm_id = arm_id;
  rec.sample_index = 0;
  const double p = arm_probability(synth, arm_id, q.tier);
  rec.is_correct = rng::hash_unit({synth.seed, kCorrectStream, qid, aid}) < p;
  rec.answer_id = rec.is_correct
                      ? q.ground_truth
                      : draw_distractor(synth, rng::hash_unit({synth.seed, kAnswerStream, qid, aid}));
  const double out_mean = q.tier == Tier::Hard
                              ? params.mean_output_tokens * synth.hard_output_scale
                              : params.mean_output_tokens;
  rec.input_tokens = lognormal_from_normal(
      params.mean_input_tokens, synth.token_sigma,
      hash_normal(synth.seed, kInputTokStream, qid, aid));
  rec.output_tokens = lognormal_from_normal(
      out_mean, synth.token_sigma,
      hash_normal(synth.seed, kOutputTokStream, qid, aid));
  rec.latency_s = arm.fixed_latency_s;
  return rec;
}

QueryRecord synth_requery(const TraceSet& trace, const Question& q, int arm_id,
                          int sample_index, rng::Stream& rng) {
  const SynthModel& synth = *trace.synth();
  const ArmSpec& arm = trace.arms()[static_cast<std::size_t>(arm_id)];
  const ArmSynthParams& params = synth.arms[static_cast<std::size_t>(arm_id)];

  QueryRecord rec;
  rec.question_id = q.question_id;
  rec.arm_id = arm_id;
  rec.sample_index = sample_index;
  const double p = arm_probability(synth, arm_id, q.tier);
  rec.is_correct = rng.bernoulli(p);
  rec.answer_id = rec.is_correct ? q.ground_truth
                                 : draw_distractor(synth, rng.uniform());
  const double out_mean = q.tier == Tier::Hard
                              ? params.mean_output_tokens * synth.hard_output_scale
                              : params.mean_output_tokens;
  rec.input_tokens = rng.lognormal_mean(params.mean_input_tokens, synth.token_sigma);
  rec.output_tokens = rng.lognormal_mean(out_mean, synth.token_sigma);
  rec.latency_s = arm.fixed_latency_s;
  return rec;
}

std::string marker_text(std::uint64_t seed, int question_id, Tier tier,
                        double fidelity) {
  std::ostringstream text;
  text << "q" << question_id;
  const auto qid = static_cast<std::uint64_t>(question_id);
  for (int slot = 0; slot < kMarkerWords; ++slot) {
    const auto s = static_cast<std::uint64_t>(slot);
    const bool own_tier =
        rng::hash_unit({seed, kTextStream, qid, s, 0}) < fidelity;
    const bool easy_vocab = (tier == Tier::Easy) == own_tier;
    const auto word = static_cast<std::size_t>(
        rng::hash_unit({seed, kTextStream, qid, s, 1}) * 16.0);
    text << ' ' << (easy_vocab ? kEasyVocab[word] : kHardVocab[word]);
  }
  return text.str();
}

std::pair<double, double> tier_probabilities(const SynthArmConfig& arm,
                                             double rho, double delta) {
  if (arm.p_easy.has_value() != arm.p_hard.has_value()) {
    throw ConfigError("arm '" + arm.model_name +
                      "': p_easy and p_hard must be given together");
  }
  if (arm.p_easy) {
    return {*arm.p_easy, *arm.p_hard};
  }
  const double m = arm.marginal_accuracy;
  if (m < 0.0 || m > 1.0) {
    throw ConfigError("arm '" + arm.model_name +
                      "': marginal_accuracy outside [0,1]");
  }
  if (rho >= 1.0 || rho <= 0.0) {
    return {m, m};  // single-tier collapse
  }
  const double p_easy = std::min({1.0, m + delta, m / rho});
  const double p_hard = std::max(0.0, (m - rho * p_easy) / (1.0 - rho));
  return {p_easy, p_hard};
}

json arm_to_json(const ArmSpec& a) {
  return json{{"arm_id", a.arm_id},
              {"model_name", a.model_name},
              {"prompt_name", a.prompt_name},
              {"input_price_per_1k", a.input_price_per_1k},
              {"output_price_per_1k", a.output_price_per_1k},
              {"fixed_latency_s", a.fixed_latency_s},
              {"requery_temperature", a.requery_temperature},
              {"marginal_accuracy", a.marginal_accuracy},
              {"is_local", a.is_local}};
}

void require_exact_keys(const json& obj,
                        std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional,
                        const std::string& where) {
  for (const char* key : required) {
    if (!obj.contains(key)) {
      throw DataError(where + ": missing field '" + key + "'");
    }
  }
  for (const auto& item : obj.items()) {
    const std::string& key = item.key();
    const bool known =
        std::any_of(required.begin(), required.end(),
                    [&](const char* k) { return key == k; }) ||
        std::any_of(optional.begin(), optional.end(),
                    [&](const char* k) { return key == k; });
    if (!known) {
      throw DataError(where + ": unknown field '" + key + "'");
    }
  }
}

ArmSpec arm_from_json(const json& j, const std::string& where) {
  require_exact_keys(j,
                     {"arm_id", "model_name", "prompt_name",
                      "input_price_per_1k", "output_price_per_1k",
                      "fixed_latency_s", "requery_temperature",
                      "marginal_accuracy", "is_local"},
                     {}, where);
  ArmSpec a;
  a.arm_id = j.at("arm_id").get<int>();
  a.model_name = j.at("model_name").get<std::string>();
  a.prompt_name = j.at("prompt_name").get<std::string>();
  a.input_price_per_1k = j.at("input_price_per_1k").get<double>();
  a.output_price_per_1k = j.at("output_price_per_1k").get<double>();
  a.fixed_latency_s = j.at("fixed_latency_s").get<double>();
  a.requery_temperature = j.at("requery_temperature").get<double>();
  a.marginal_accuracy = j.at("marginal_accuracy").get<double>();
  a.is_local = j.at("is_local").get<bool>();
  return a;
}

Split split_from_name(const std::string& name, const std::string& where) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw DataError(where + ": unknown split tag '" + name + "'");
}

Tier tier_from_name(const std::string& name, const std::string& where) {
  if (name == "easy") return Tier::Easy;
  if (name == "hard") return Tier::Hard;
  throw DataError(where + ": unknown tier '" + name + "'");
}

}  // namespace

const char* split_name(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

const char* tier_name(Tier tier) {
  return tier == Tier::Easy ? "easy" : "hard";
}

TraceSet::TraceSet(std::vector<ArmSpec> arms, std::vector<Question> questions,
                   std::vector<QueryRecord> records,
                   std::optional<SynthModel> synth)
    : arms_(std::move(arms)),
      questions_(std::move(questions)),
      records_(std::move(records)),
      synth_(std::move(synth)) {
  rebuild_indexes();
  validate();
}

void TraceSet::rebuild_indexes() {
  record_index_.clear();
  record_index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const QueryRecord& r = records_[i];
    const auto [it, inserted] = record_index_.emplace(
        record_key(r.question_id, r.arm_id, r.sample_index), i);
    if (!inserted) {
      throw DataError("duplicate record for question " +
                      std::to_string(r.question_id) + ", arm " +
                      std::to_string(r.arm_id) + ", sample " +
                      std::to_string(r.sample_index));
    }
  }
  question_index_.clear();
  question_index_.reserve(questions_.size());
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    const auto [it, inserted] =
        question_index_.emplace(questions_[i].question_id, i);
    if (!inserted) {
      throw DataError("duplicate question id " +
                      std::to_string(questions_[i].question_id));
    }
  }
}

const Question& TraceSet::question(int question_id) const {
  const auto it = question_index_.find(question_id);
  if (it == question_index_.end()) {
    throw DataError("unknown question id " + std::to_string(question_id));
  }
  return questions_[it->second];
}

bool TraceSet::has_question(int question_id) const {
  return question_index_.contains(question_id);
}

const QueryRecord* TraceSet::find_record(int question_id, int arm_id,
                                         int sample_index) const {
  const auto it =
      record_index_.find(record_key(question_id, arm_id, sample_index));
  return it == record_index_.end() ? nullptr : &records_[it->second];
}

void TraceSet::add_record(const QueryRecord& record) {
  const auto [it, inserted] = record_index_.emplace(
      record_key(record.question_id, record.arm_id, record.sample_index),
      records_.size());
  if (!inserted) {
    throw DataError("record already present for question " +
                    std::to_string(record.question_id));
  }
  records_.push_back(record);
}

std::vector<int> TraceSet::question_ids(Split split) const {
  std::vector<int> ids;
  for (const Question& q : questions_) {
    if (q.split == split) ids.push_back(q.question_id);
  }
  return ids;
}

std::vector<int> TraceSet::all_question_ids() const {
  std::vector<int> ids;
  ids.reserve(questions_.size());
  for (const Question& q : questions_) ids.push_back(q.question_id);
  return ids;
}

double TraceSet::mean_input_tokens(int arm_id) const {
  if (synth_) return synth_->arms[static_cast<std::size_t>(arm_id)].mean_input_tokens;
  double total = 0.0;
  int count = 0;
  for (const QueryRecord& r : records_) {
    if (r.arm_id == arm_id) {
      total += r.input_tokens;
      ++count;
    }
  }
  if (count == 0) {
    throw DataError("no token statistics for arm " + std::to_string(arm_id));
  }
  return total / count;
}

double TraceSet::mean_output_tokens(int arm_id) const {
  if (synth_) {
    const SynthModel& s = *synth_;
    const double base = s.arms[static_cast<std::size_t>(arm_id)].mean_output_tokens;
    // Expectation over tiers: hard questions run longer outputs.
    return base * (s.easy_fraction + (1.0 - s.easy_fraction) * s.hard_output_scale);
  }
  double total = 0.0;
  int count = 0;
  for (const QueryRecord& r : records_) {
    if (r.arm_id == arm_id) {
      total += r.output_tokens;
      ++count;
    }
  }
  if (count == 0) {
    throw DataError("no token statistics for arm " + std::to_string(arm_id));
  }
  return total / count;
}

double TraceSet::tier_accuracy(int arm_id, Tier tier) const {
  if (synth_) return arm_probability(*synth_, arm_id, tier);
  return arms_[static_cast<std::size_t>(arm_id)].marginal_accuracy;
}

void TraceSet::validate() const {
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    const ArmSpec& a = arms_[i];
    if (a.arm_id != static_cast<int>(i)) {
      throw DataError("arm_id " + std::to_string(a.arm_id) +
                      " does not match its position " + std::to_string(i));
    }
    if (a.input_price_per_1k < 0.0 || a.output_price_per_1k < 0.0) {
      throw DataError("arm " + std::to_string(a.arm_id) + ": negative price");
    }
    if (a.fixed_latency_s < 0.0) {
      throw DataError("arm " + std::to_string(a.arm_id) + ": negative latency");
    }
    if (a.marginal_accuracy < 0.0 || a.marginal_accuracy > 1.0) {
      throw DataError("arm " + std::to_string(a.arm_id) +
                      ": marginal_accuracy outside [0,1]");
    }
    if (a.requery_temperature < 0.0 || a.requery_temperature > 2.0) {
      throw DataError("arm " + std::to_string(a.arm_id) +
                      ": requery_temperature outside [0,2]");
    }
  }
  for (std::size_t i = 1; i < arms_.size(); ++i) {
    const ArmSpec& lo = arms_[i - 1];
    const ArmSpec& hi = arms_[i];
    double lo_cost = 0.0;
    double hi_cost = 0.0;
    if (synth_) {
      const auto& slo = synth_->arms[i - 1];
      const auto& shi = synth_->arms[i];
      lo_cost = (slo.mean_input_tokens * lo.input_price_per_1k +
                 slo.mean_output_tokens * lo.output_price_per_1k) / 1000.0;
      hi_cost = (shi.mean_input_tokens * hi.input_price_per_1k +
                 shi.mean_output_tokens * hi.output_price_per_1k) / 1000.0;
    }
    const bool ordered = lo.marginal_accuracy < hi.marginal_accuracy ||
                         (lo.marginal_accuracy == hi.marginal_accuracy &&
                          lo_cost <= hi_cost);
    if (!ordered) {
      std::ostringstream msg;
      msg << "arms not sorted: arm " << hi.arm_id << " (marginal "
          << hi.marginal_accuracy << ") follows arm " << lo.arm_id
          << " (marginal " << lo.marginal_accuracy << ")";
      throw DataError(msg.str());
    }
  }
  if (synth_ && synth_->arms.size() != arms_.size()) {
    throw DataError("synth block arm count does not match arm list");
  }
  if (synth_) {
    for (std::size_t i = 0; i < synth_->arms.size(); ++i) {
      const ArmSynthParams& p = synth_->arms[i];
      if (p.p_easy < 0.0 || p.p_easy > 1.0 || p.p_hard < 0.0 || p.p_hard > 1.0) {
        throw DataError("synth arm " + std::to_string(i) +
                        ": tier probability outside [0,1]");
      }
      if (p.mean_input_tokens <= 0.0 || p.mean_output_tokens < 0.0) {
        throw DataError("synth arm " + std::to_string(i) +
                        ": non-positive token means");
      }
    }
  }
  for (const QueryRecord& r : records_) {
    if (!question_index_.contains(r.question_id)) {
      throw DataError("record references unknown question " +
                      std::to_string(r.question_id));
    }
    if (r.arm_id < 0 || r.arm_id >= arm_count()) {
      throw DataError("record references unknown arm " +
                      std::to_string(r.arm_id));
    }
    if (r.input_tokens <= 0.0) {
      throw DataError("record (question " + std::to_string(r.question_id) +
                      ", arm " + std::to_string(r.arm_id) +
                      "): input_tokens must be positive");
    }
    if (r.output_tokens < 0.0 || r.latency_s < 0.0 || r.sample_index < 0) {
      throw DataError("record (question " + std::to_string(r.question_id) +
                      ", arm " + std::to_string(r.arm_id) +
                      "): negative field");
    }
  }
}

TraceSet synth_generate(const SynthConfig& config, std::uint64_t seed) {
  if (config.arms.empty()) {
    throw ConfigError("synth config has no arms");
  }
  if (config.n_questions < 0) {
    throw ConfigError("n_questions must be non-negative");
  }
  if (config.easy_fraction < 0.0 || config.easy_fraction > 1.0) {
    throw ConfigError("easy_fraction outside [0,1]");
  }
  if (config.distractor_count < 1) {
    throw ConfigError("distractor_count must be at least 1");
  }
  if (config.train_fraction + config.val_fraction > 1.0) {
    throw ConfigError("train_fraction + val_fraction exceeds 1");
  }

  SynthModel synth;
  synth.seed = seed;
  synth.easy_fraction = config.easy_fraction;
  synth.distractor_count = config.distractor_count;
  synth.zipf_exponent = config.zipf_exponent;
  synth.token_sigma = config.token_sigma;
  synth.hard_output_scale = config.hard_output_scale;
  synth.marker_fidelity = config.marker_fidelity;

  std::vector<ArmSpec> arms;
  arms.reserve(config.arms.size());
  for (std::size_t i = 0; i < config.arms.size(); ++i) {
    const SynthArmConfig& c = config.arms[i];
    const auto [p_easy, p_hard] =
        tier_probabilities(c, config.easy_fraction, config.accuracy_delta);
    if (p_easy < 0.0 || p_easy > 1.0 || p_hard < 0.0 || p_hard > 1.0) {
      throw ConfigError("arm '" + c.model_name +
                        "': infeasible calibration, tier probability outside [0,1]");
    }
    ArmSpec a;
    a.arm_id = static_cast<int>(i);
    a.model_name = c.model_name;
    a.prompt_name = c.prompt_name;
    a.input_price_per_1k = c.input_price_per_1k;
    a.output_price_per_1k = c.output_price_per_1k;
    a.fixed_latency_s = c.fixed_latency_s;
    a.requery_temperature = c.requery_temperature;
    a.marginal_accuracy =
        c.p_easy ? config.easy_fraction * p_easy +
                       (1.0 - config.easy_fraction) * p_hard
                 : c.marginal_accuracy;
    a.is_local = c.is_local;
    arms.push_back(std::move(a));

    ArmSynthParams params;
    params.p_easy = p_easy;
    params.p_hard = p_hard;
    params.mean_input_tokens = c.mean_input_tokens;
    params.mean_output_tokens = c.mean_output_tokens;
    synth.arms.push_back(params);
  }

  const int n = config.n_questions;
  const int n_train = static_cast<int>(std::lround(n * config.train_fraction));
  const int n_val = static_cast<int>(std::lround(n * config.val_fraction));
  std::vector<Question> questions;
  questions.reserve(static_cast<std::size_t>(n));
  for (int qid = 0; qid < n; ++qid) {
    Question q;
    q.question_id = qid;
    q.ground_truth = 0;
    const double tier_draw =
        rng::hash_unit({seed, kTierStream, static_cast<std::uint64_t>(qid)});
    q.tier = tier_draw < config.easy_fraction ? Tier::Easy : Tier::Hard;
    q.split = qid < n_train ? Split::Train
              : qid < n_train + n_val ? Split::Val
                                      : Split::Test;
    q.text = marker_text(seed, qid, q.tier, config.marker_fidelity);
    questions.push_back(std::move(q));
  }

  return TraceSet(std::move(arms), std::move(questions), {}, std::move(synth));
}

QueryRecord sample_response(const TraceSet& trace, int question_id, int arm_id,
                            int sample_index, rng::Stream& rng) {
  const Question& q = trace.question(question_id);
  if (arm_id < 0 || arm_id >= trace.arm_count()) {
    throw DataError("unknown arm id " + std::to_string(arm_id));
  }
  if (const QueryRecord* stored =
          trace.find_record(question_id, arm_id, sample_index)) {
    return *stored;
  }
  if (!trace.synth()) {
    throw TraceExhaustedError(
        "replay trace has no record for question " + std::to_string(question_id) +
        ", arm " + std::to_string(arm_id) + ", sample " +
        std::to_string(sample_index));
  }
  if (sample_index == 0) {
    return synth_temperature0(trace, q, arm_id);
  }
  return synth_requery(trace, q, arm_id, sample_index, rng);
}

void save_trace(const TraceSet& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot open '" + path.string() + "' for writing");
  }
  json header;
  header["version"] = 1;
  header["arms"] = json::array();
  for (const ArmSpec& a : trace.arms()) header["arms"].push_back(arm_to_json(a));
  header["questions"] = json::array();
  for (const Question& q : trace.questions()) {
    header["questions"].push_back(json{{"question_id", q.question_id},
                                       {"text", q.text},
                                       {"ground_truth", q.ground_truth},
                                       {"split", split_name(q.split)},
                                       {"tier", tier_name(q.tier)}});
  }
  if (trace.synth()) {
    const SynthModel& s = *trace.synth();
    json arms = json::array();
    for (const ArmSynthParams& p : s.arms) {
      arms.push_back(json{{"p_easy", p.p_easy},
                          {"p_hard", p.p_hard},
                          {"mean_input_tokens", p.mean_input_tokens},
                          {"mean_output_tokens", p.mean_output_tokens}});
    }
    header["synth"] = json{{"seed", s.seed},
                           {"easy_fraction", s.easy_fraction},
                           {"distractor_count", s.distractor_count},
                           {"zipf_exponent", s.zipf_exponent},
                           {"token_sigma", s.token_sigma},
                           {"hard_output_scale", s.hard_output_scale},
                           {"marker_fidelity", s.marker_fidelity},
                           {"arms", std::move(arms)}};
  }
  out << header.dump() << '\n';
  for (const QueryRecord& r : trace.records()) {
    const json line{{"question_id", r.question_id},
                    {"arm_id", r.arm_id},
                    {"sample_index", r.sample_index},
                    {"answer_id", r.answer_id},
                    {"is_correct", r.is_correct},
                    {"input_tokens", r.input_tokens},
                    {"output_tokens", r.output_tokens},
                    {"latency_s", r.latency_s}};
    out << line.dump() << '\n';
  }
  if (!out) {
    throw DataError("write to '" + path.string() + "' failed");
  }
}

TraceSet load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open trace file '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("trace file '" + path.string() + "' is empty");
  }

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError("line 1: header parse error: " + std::string(e.what()));
  }
  require_exact_keys(header, {"version", "arms", "questions"}, {"synth"},
                     "header");
  if (header.at("version").get<int>() != 1) {
    throw DataError("unsupported trace version " +
                    header.at("version").dump());
  }

  std::vector<ArmSpec> arms;
  for (const json& j : header.at("arms")) {
    arms.push_back(arm_from_json(j, "header arm"));
  }
  std::vector<Question> questions;
  for (const json& j : header.at("questions")) {
    require_exact_keys(j, {"question_id", "text", "ground_truth", "split", "tier"},
                       {}, "header question");
    Question q;
    q.question_id = j.at("question_id").get<int>();
    q.text = j.at("text").get<std::string>();
    q.ground_truth = j.at("ground_truth").get<int>();
    q.split = split_from_name(j.at("split").get<std::string>(), "header question");
    q.tier = tier_from_name(j.at("tier").get<std::string>(), "header question");
    questions.push_back(std::move(q));
  }

  std::optional<SynthModel> synth;
  if (header.contains("synth")) {
    const json& s = header.at("synth");
    require_exact_keys(s,
                       {"seed", "easy_fraction", "distractor_count",
                        "zipf_exponent", "token_sigma", "hard_output_scale",
                        "marker_fidelity", "arms"},
                       {}, "header synth");
    SynthModel model;
    model.seed = s.at("seed").get<std::uint64_t>();
    model.easy_fraction = s.at("easy_fraction").get<double>();
    model.distractor_count = s.at("distractor_count").get<int>();
    model.zipf_exponent = s.at("zipf_exponent").get<double>();
    model.token_sigma = s.at("token_sigma").get<double>();
    model.hard_output_scale = s.at("hard_output_scale").get<double>();
    model.marker_fidelity = s.at("marker_fidelity").get<double>();
    for (const json& j : s.at("arms")) {
      require_exact_keys(j, {"p_easy", "p_hard", "mean_input_tokens",
                             "mean_output_tokens"},
                         {}, "header synth arm");
      ArmSynthParams p;
      p.p_easy = j.at("p_easy").get<double>();
      p.p_hard = j.at("p_hard").get<double>();
      p.mean_input_tokens = j.at("mean_input_tokens").get<double>();
      p.mean_output_tokens = j.at("mean_output_tokens").get<double>();
      model.arms.push_back(p);
    }
    synth = std::move(model);
  }

  std::vector<QueryRecord> records;
  int line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_number) +
                      ": parse error: " + std::string(e.what()));
    }
    const std::string where = "line " + std::to_string(line_number);
    require_exact_keys(j,
                       {"question_id", "arm_id", "sample_index", "answer_id",
                        "is_correct", "input_tokens", "output_tokens",
                        "latency_s"},
                       {}, where);
    QueryRecord r;
    r.question_id = j.at("question_id").get<int>();
    r.arm_id = j.at("arm_id").get<int>();
    r.sample_index = j.at("sample_index").get<int>();
    r.answer_id = j.at("answer_id").get<int>();
    r.is_correct = j.at("is_correct").get<bool>();
    r.input_tokens = j.at("input_tokens").get<double>();
    r.output_tokens = j.at("output_tokens").get<double>();
    r.latency_s = j.at("latency_s").get<double>();
    records.push_back(r);
  }

  return TraceSet(std::move(arms), std::move(questions), std::move(records),
                  std::move(synth));
}

SynthConfig SynthConfig::paper_gsm8k() {
  SynthConfig cfg;
  cfg.n_questions = 5000;
  cfg.train_fraction = 0.7;
  cfg.val_fraction = 0.15;

  auto arm = [](std::string model, std::string prompt, double marginal,
                double mean_in, double mean_out, double in_price,
                double out_price, double latency, double temp, bool local) {
    SynthArmConfig c;
    c.model_name = std::move(model);
    c.prompt_name = std::move(prompt);
    c.marginal_accuracy = marginal;
    c.mean_input_tokens = mean_in;
    c.mean_output_tokens = mean_out;
    c.input_price_per_1k = in_price;
    c.output_price_per_1k = out_price;
    c.fixed_latency_s = latency;
    c.requery_temperature = temp;
    c.is_local = local;
    return c;
  };

  cfg.arms = {
      arm("llama-2-7b-chat", "cot_fewshot", 0.2365, 911.43, 119.14, 0.0, 0.0, 8.0, 0.8, true),
      arm("llama-2-13b-chat", "cot_fewshot", 0.3791, 911.43, 128.29, 0.0, 0.0, 16.0, 0.8, true),
      arm("gpt-3.5-turbo", "domain_expert", 0.7362, 90.98, 114.58, 0.0015, 0.002, 6.0, 1.0, false),
      arm("gpt-3.5-turbo", "cot_fewshot", 0.7915, 773.70, 108.31, 0.0015, 0.002, 6.0, 1.0, false),
      arm("gpt-4", "domain_expert", 0.8317, 88.98, 81.73, 0.03, 0.06, 6.0, 1.0, false),
      arm("gpt-4", "cot_fewshot", 0.9295, 771.70, 103.62, 0.03, 0.06, 6.0, 1.0, false),
  };
  return cfg;
}

SynthConfig SynthConfig::planted_two_arm(int n_questions) {
  SynthConfig cfg;
  cfg.n_questions = n_questions;
  cfg.easy_fraction = 0.5;
  cfg.train_fraction = 0.7;
  cfg.val_fraction = 0.15;

  SynthArmConfig cheap;
  cheap.model_name = "scout";
  cheap.prompt_name = "plain";
  cheap.p_easy = 0.90;
  cheap.p_hard = 0.10;
  cheap.mean_input_tokens = 400.0;
  cheap.mean_output_tokens = 80.0;
  cheap.input_price_per_1k = 0.0002;
  cheap.output_price_per_1k = 0.00025;
  cheap.fixed_latency_s = 2.0;
  cheap.requery_temperature = 1.0;

  SynthArmConfig strong;
  strong.model_name = "oracle";
  strong.prompt_name = "cot_fewshot";
  strong.p_easy = 0.95;
  strong.p_hard = 0.95;
  strong.mean_input_tokens = 800.0;
  strong.mean_output_tokens = 160.0;
  strong.input_price_per_1k = 0.002;
  strong.output_price_per_1k = 0.0025;
  strong.fixed_latency_s = 6.0;
  strong.requery_temperature = 1.0;

  cfg.arms = {std::move(cheap), std::move(strong)};
  return cfg;
}

}  // namespace cascadelab
