#pragma once

#include <string>

#include "dtcbf/spec_file.hpp"
#include "dtcbf/synthesis.hpp"
#include "dtcbf/verify.hpp"

namespace dtcbf {

// Self-contained reproduction unit on disk:
//   <dir>/spec.toml          copy of the problem specification
//   <dir>/result.json        triple, iteration logs, barrier iterates
//   <dir>/certificates.json  Gram certificates with bases and targets
//   <dir>/verification.json  written by the verify command
//   <dir>/levelsets/         written by the levelset command
struct ResultBundle {
    ProblemSpec spec;
    SynthesisResult result;
};

void write_bundle(const std::string& dir, const ProblemSpec& spec, const SynthesisResult& result);
ResultBundle read_bundle(const std::string& dir);

void write_verification(const std::string& dir, const VerificationReport& report,
                        const SamplingSpec& spec);

}  // namespace dtcbf
