#pragma once

#include <string>
#include <string_view>

#include "lockstep/campaigns.hpp"
#include "lockstep/lockstep_detection.hpp"
#include "lockstep/star_detection.hpp"

namespace lockstep {

std::string_view to_string(StarStatus s);

// Single-line JSON renderings with a fixed key order.
std::string star_to_json(const Star& star, const StarTable& table);
std::string star_status_to_json(StarId id, StarStatus status, std::size_t batch);
std::string lockstep_to_json(const Lockstep& ls);
std::string report_to_json(const LockstepReport& report);
std::string candidate_to_json(const CandidateRecord& rec, const SymbolTable& symbols);

// Inverse of lockstep_to_json. Throws std::invalid_argument on bad input.
Lockstep lockstep_from_json(std::string_view line);

}  // namespace lockstep
