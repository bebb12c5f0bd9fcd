#include "dyscreen/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dyscreen/error.hpp"
#include "dyscreen/rng.hpp"

namespace dyscreen {
namespace {

// Per-question difficulty: base hit probability in [0.6, 0.9] and a typical number of trials.
double base_hit_probability(int qid) { return 0.6 + 0.03 * static_cast<double>((qid * 37) % 11); }
int base_trials(int qid) { return 4 + (qid * 7) % 5; }

}  // namespace

std::size_t synth_positive_count(std::size_t n, double prevalence) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * prevalence));
}

Dataset synth_generate(const SynthOptions& o) {
  if (o.n < 10) throw DataError("synthetic dataset needs n >= 10");
  if (!(o.prevalence > 0.0 && o.prevalence < 1.0)) throw DataError("prevalence must lie in (0, 1)");
  if (!(o.separation >= 0.0 && o.separation <= 1.0)) throw DataError("separation must lie in [0, 1]");
  const std::size_t n_pos = synth_positive_count(o.n, o.prevalence);
  if (n_pos == 0 || n_pos >= o.n) throw DataError("prevalence leaves one class empty at this n");

  Rng rng(o.seed);
  std::vector<std::uint8_t> positive(o.n, 0);
  std::fill(positive.begin(), positive.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  for (std::size_t i = o.n; i > 1; --i) std::swap(positive[i - 1], positive[rng.below(i)]);

  const auto [age_lo, age_hi] = o.variant.age_range();
  Dataset out{o.variant, {}};
  out.records.reserve(o.n);
  char id[32];
  for (std::size_t i = 0; i < o.n; ++i) {
    ParticipantRecord p;
    std::snprintf(id, sizeof id, "s%05zu", i + 1);
    p.id = id;
    p.label = positive[i] ? Label::Dyslexia : Label::NoDyslexia;
    p.gender = rng.bernoulli(0.5) ? Gender::Male : Gender::Female;
    p.native_spanish_monolingual = rng.bernoulli(0.9);
    p.failed_language_subject = rng.bernoulli(0.2);
    p.age = age_lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(age_hi - age_lo + 1)));

    FeatureVector fv = FeatureVector::with_demographics(o.variant, p);
    for (int q : o.variant.qids()) {
      double hit_p = base_hit_probability(q);
      if (positive[i]) hit_p = std::clamp(hit_p - o.separation, 0.0, 1.0);
      QuestionMeasures m;
      m.qid = q;
      m.clicks = base_trials(q) + static_cast<int>(rng.below(3));
      m.hits = rng.binomial(static_cast<int>(m.clicks), hit_p);
      m.misses = rng.binomial(static_cast<int>(m.clicks - m.hits), 0.85);
      m.score = m.hits;
      m.finish();
      const std::size_t off = o.variant.block_offset(q);
      for (Measure kind : kAllMeasures) fv.values[off + static_cast<std::size_t>(kind)] = m.value(kind);
    }
    out.records.push_back({std::move(p), std::move(fv.values)});
  }
  return out;
}

}  // namespace dyscreen
