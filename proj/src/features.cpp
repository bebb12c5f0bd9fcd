#include "dyscreen/features.hpp"

#include <algorithm>
#include <map>

#include "dyscreen/error.hpp"

namespace dyscreen {
namespace {

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool text_matches_item(const std::string& submitted, const StimulusItem& item) {
  const std::string canon = text_canonicalize(submitted);
  return std::any_of(item.targets.begin(), item.targets.end(),
                     [&](const std::string& t) { return text_canonicalize(t) == canon; });
}

std::string event_where(const InteractionEvent& e) {
  return "question " + std::to_string(e.qid) + " event at t=" + std::to_string(e.timestamp_ms) + "ms (" +
         std::string(event_kind_token(e.kind)) + ")";
}

enum class Bracket { NotStarted, Open, Ended };

}  // namespace

std::string text_canonicalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    // U+00A0 no-break space counts as whitespace
    const bool nbsp = c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0;
    if (is_space_byte(c) || nbsp) {
      if (nbsp) ++i;
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') {
      out += static_cast<char>(c + ('a' - 'A'));
    } else if (c == 0xC3 && i + 1 < s.size()) {
      // Latin-1 capitals U+00C0..U+00DE (minus U+00D7) map to +0x20
      auto next = static_cast<unsigned char>(s[i + 1]);
      if (next >= 0x80 && next <= 0x9E && next != 0x97) next = static_cast<unsigned char>(next + 0x20);
      out += static_cast<char>(c);
      out += static_cast<char>(next);
      ++i;
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

QuestionMeasures measures_for_question(std::span<const InteractionEvent> events, const QuestionSpec& spec) {
  QuestionMeasures m;
  m.qid = spec.qid;
  std::vector<std::int64_t> item_hits(spec.item_count(), 0);
  const bool has_start = std::any_of(events.begin(), events.end(),
                                     [](const auto& e) { return e.kind == EventKind::QuestionStart; });
  Bracket state = has_start ? Bracket::NotStarted : Bracket::Open;

  for (const auto& e : events) {
    if (e.qid != spec.qid)
      throw MalformedSessionError("event for question " + std::to_string(e.qid) + " passed to question " +
                                  std::to_string(spec.qid));
    if (e.kind == EventKind::QuestionStart) {
      if (state != Bracket::NotStarted) throw MalformedSessionError(event_where(e) + ": repeated start");
      state = Bracket::Open;
      continue;
    }
    if (e.kind == EventKind::QuestionEnd) {
      if (state != Bracket::Open) throw MalformedSessionError(event_where(e) + ": end without start");
      state = Bracket::Ended;
      continue;
    }
    if (state != Bracket::Open) throw MalformedSessionError(event_where(e) + ": outside the question bracket");
    if (e.item_index < 0 || static_cast<std::size_t>(e.item_index) >= spec.item_count())
      throw MalformedSessionError(event_where(e) + ": item " + std::to_string(e.item_index) +
                                  " does not exist (question has " + std::to_string(spec.item_count()) + ")");
    const auto item = static_cast<std::size_t>(e.item_index);
    switch (e.kind) {
      case EventKind::ClickTarget:
        ++m.clicks;
        ++m.hits;
        ++item_hits[item];
        break;
      case EventKind::ClickDistractor:
        ++m.clicks;
        ++m.misses;
        break;
      case EventKind::ClickNeutral:
        ++m.clicks;
        break;
      case EventKind::SubmitText:
        ++m.clicks;  // a submission is one interaction
        if (text_matches_item(e.payload.value_or(""), spec.items[item])) {
          ++m.hits;
          ++item_hits[item];
        } else {
          ++m.misses;
        }
        break;
      default:
        break;
    }
  }
  for (auto h : item_hits) m.score += h;
  m.finish();
  return m;
}

void validate_session_events(const SessionLog& session) {
  std::map<int, Bracket> state;
  std::int64_t last_ts = 0;
  std::optional<std::int64_t> first_start;
  for (std::size_t i = 0; i < session.events.size(); ++i) {
    const auto& e = session.events[i];
    if (!session.variant.contains(e.qid))
      throw MalformedSessionError(event_where(e) + ": question not in variant " + session.variant.label());
    if (i > 0 && e.timestamp_ms < last_ts)
      throw MalformedSessionError(event_where(e) + ": timestamp goes backwards (previous " +
                                  std::to_string(last_ts) + "ms)");
    last_ts = e.timestamp_ms;
    auto& st = state.try_emplace(e.qid, Bracket::NotStarted).first->second;
    switch (e.kind) {
      case EventKind::QuestionStart:
        if (st != Bracket::NotStarted) throw MalformedSessionError(event_where(e) + ": question started twice");
        st = Bracket::Open;
        if (!first_start) first_start = e.timestamp_ms;
        break;
      case EventKind::QuestionEnd:
        if (st != Bracket::Open) throw MalformedSessionError(event_where(e) + ": end without an open start");
        st = Bracket::Ended;
        break;
      default:
        if (st != Bracket::Open) throw MalformedSessionError(event_where(e) + ": outside the question bracket");
        break;
    }
    if (first_start && e.timestamp_ms - *first_start > kSessionCapMs)
      throw MalformedSessionError(event_where(e) + ": session exceeds the 15 minute limit");
  }
}

FeatureVector extract_features(const SessionLog& session, const QuestionManifest& manifest) {
  if (!session.completed) throw IncompleteSessionError("session " + session.session_id + " is not completed", {});
  validate_session_events(session);

  std::map<int, std::vector<InteractionEvent>> by_question;
  for (const auto& e : session.events) by_question[e.qid].push_back(e);

  std::vector<int> missing;
  for (int q : session.variant.qids()) {
    auto it = by_question.find(q);
    const bool bracketed =
        it != by_question.end() &&
        std::any_of(it->second.begin(), it->second.end(), [](const auto& e) { return e.kind == EventKind::QuestionStart; }) &&
        std::any_of(it->second.begin(), it->second.end(), [](const auto& e) { return e.kind == EventKind::QuestionEnd; });
    if (!bracketed) missing.push_back(q);
  }
  if (!missing.empty()) {
    std::string list;
    for (int q : missing) list += (list.empty() ? "" : ",") + std::to_string(q);
    throw IncompleteSessionError("session " + session.session_id + " lacks start/end for questions " + list,
                                 std::move(missing));
  }

  FeatureVector fv = FeatureVector::with_demographics(session.variant, session.participant);
  for (int q : session.variant.qids()) {
    const auto m = measures_for_question(by_question.at(q), manifest.question(q));
    const std::size_t off = session.variant.block_offset(q);
    for (Measure kind : kAllMeasures) fv.values[off + static_cast<std::size_t>(kind)] = m.value(kind);
  }
  return fv;
}

}  // namespace dyscreen
