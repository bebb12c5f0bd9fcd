#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "dyscreen/types.hpp"

namespace dyscreen {

nlohmann::json participant_to_json(const ParticipantRecord& p);
ParticipantRecord participant_from_json(const nlohmann::json& j);

nlohmann::json event_to_json(const InteractionEvent& e);
InteractionEvent event_from_json(const nlohmann::json& j);

/// JSON-lines: a header object {session_id, participant, variant, completed}, then one event per line.
SessionLog read_session_log(std::istream& in);
SessionLog read_session_log(const std::filesystem::path& path);
void write_session_log(std::ostream& out, const SessionLog& log);

}  // namespace dyscreen
