#pragma once

#include <span>
#include <string>
#include <string_view>

#include "dyscreen/manifest.hpp"
#include "dyscreen/types.hpp"

namespace dyscreen {

/// Trim, lowercase (ASCII and Latin-1 letters, accents kept), collapse interior whitespace.
std::string text_canonicalize(std::string_view s);

/// Counts one question's events. `events` must be that question's events, in order; the
/// QuestionStart/QuestionEnd markers may be included and are skipped. Interactions that fall
/// outside the bracket raise MalformedSessionError.
QuestionMeasures measures_for_question(std::span<const InteractionEvent> events,
                                       const QuestionSpec& spec);

/// Checks ordering and bracketing rules: non-decreasing timestamps, qids within the variant,
/// one Start/End pair per question, interactions inside their question's bracket, 15-minute
/// cap. Throws MalformedSessionError. Missing brackets are not checked here.
void validate_session_events(const SessionLog& session);

/// Demographics plus six measures per variant question.
/// Throws IncompleteSessionError when a variant question has no Start/End bracket.
FeatureVector extract_features(const SessionLog& session, const QuestionManifest& manifest);

}  // namespace dyscreen
