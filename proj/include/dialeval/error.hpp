#pragma once

#include <stdexcept>
#include <string>

namespace dialeval {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Bad input data or configuration: malformed files, out-of-range scores,
/// schema violations. The CLI maps this to exit code 1.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// A score that has no defined value for the given inputs (all tokens out of
/// vocabulary, zero vectors, constant correlation input, ...). Carries a
/// machine-readable reason code alongside the message.
class UndefinedScore : public Error {
  public:
    UndefinedScore(std::string reason, const std::string &message)
        : Error(message), reason_(std::move(reason)) {}

    const std::string &reason() const noexcept { return reason_; }

  private:
    std::string reason_;
};

namespace reason {
inline constexpr const char *kOovSentence = "oov_sentence";
inline constexpr const char *kEmptyCandidate = "empty_candidate";
inline constexpr const char *kEmptyReference = "empty_reference";
inline constexpr const char *kZeroVector = "zero_vector";
inline constexpr const char *kOrderTooLong = "order_too_long";
inline constexpr const char *kNoOrders = "no_orders";
inline constexpr const char *kNoCandidates = "no_candidates";
inline constexpr const char *kZeroQuery = "zero_query";
inline constexpr const char *kConstantInput = "constant_input";
inline constexpr const char *kDegenerateMarginals = "degenerate_marginals";
inline constexpr const char *kTooFewSamples = "too_few_samples";
} // namespace reason

} // namespace dialeval
