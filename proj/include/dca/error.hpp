#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dca {

// Every failure surfaced by the library carries one of these codes. The
// string form is stable and is what the HTTP layer and CLI report.
enum class Errc {
  invalid_argument,
  parse_error,
  invalid_network,
  invalid_structure,
  invalid_evidence,
  evidence_inconsistent,
  state_space_too_large,
  too_many_parents,
  unknown_variable,
  incomplete_record,
  duplicate_id,
  cause_in_multiple_categories,
  orphan_member_reference,
  no_problems,
  unknown_id,
  unknown_unit,
  unknown_defect,
  cross_iteration_member,
  unknown_version,
  unknown_session,
  step_skip,
  gate_unsatisfied,
  wrong_step,
  bad_reference,
  illegal_status_transition,
  unmapped_free_text_cause,
  learn_failure,
  not_found,
  conflict,
  schema_mismatch,
  io_error,
};

constexpr std::string_view code_name(Errc c) noexcept {
  switch (c) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::parse_error: return "parse-error";
    case Errc::invalid_network: return "invalid-network";
    case Errc::invalid_structure: return "invalid-structure";
    case Errc::invalid_evidence: return "invalid-evidence";
    case Errc::evidence_inconsistent: return "evidence-inconsistent";
    case Errc::state_space_too_large: return "state-space-too-large";
    case Errc::too_many_parents: return "too-many-parents";
    case Errc::unknown_variable: return "unknown-variable";
    case Errc::incomplete_record: return "incomplete-record";
    case Errc::duplicate_id: return "duplicate-id";
    case Errc::cause_in_multiple_categories: return "cause-in-multiple-categories";
    case Errc::orphan_member_reference: return "orphan-member-reference";
    case Errc::no_problems: return "no-problems";
    case Errc::unknown_id: return "unknown-id";
    case Errc::unknown_unit: return "unknown-unit";
    case Errc::unknown_defect: return "unknown-defect";
    case Errc::cross_iteration_member: return "cross-iteration-member";
    case Errc::unknown_version: return "unknown-version";
    case Errc::unknown_session: return "unknown-session";
    case Errc::step_skip: return "step-skip";
    case Errc::gate_unsatisfied: return "gate-unsatisfied";
    case Errc::wrong_step: return "wrong-step";
    case Errc::bad_reference: return "bad-reference";
    case Errc::illegal_status_transition: return "illegal-status-transition";
    case Errc::unmapped_free_text_cause: return "unmapped-free-text-cause";
    case Errc::learn_failure: return "learn-failure";
    case Errc::not_found: return "not-found";
    case Errc::conflict: return "conflict";
    case Errc::schema_mismatch: return "schema-mismatch";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

// Errors caused by the caller's input, as opposed to the environment or an
// internal limit. The CLI maps these to exit code 1, everything else to 2.
constexpr bool is_input_error(Errc c) noexcept {
  switch (c) {
    case Errc::state_space_too_large:
    case Errc::learn_failure:
    case Errc::io_error:
    case Errc::schema_mismatch:
    case Errc::conflict:
      return false;
    default:
      return true;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return dca::code_name(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace dca
