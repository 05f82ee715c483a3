#pragma once

#include <stdexcept>
#include <string>

namespace mdiqkd {

/// A branch denominator of the two-single-photon yield bound vanished:
/// the decoy and signal photon-number distributions are too similar to
/// separate the single-photon contribution. Separate the intensities.
class DegenerateDenominator : public std::runtime_error {
public:
    explicit DegenerateDenominator(const std::string& msg) : std::runtime_error(msg) {}
};

/// A bound required a strictly positive certified single-photon-pair yield.
/// Callers must treat this as "no key".
class ZeroSingleYield : public std::runtime_error {
public:
    explicit ZeroSingleYield(const std::string& msg) : std::runtime_error(msg) {}
};

/// The decoy admissibility condition between a weak and a strong source failed
/// (or is undefined because of zero-probability components).
class DecoyConditionViolation : public std::runtime_error {
public:
    explicit DecoyConditionViolation(const std::string& msg) : std::runtime_error(msg) {}
};

/// Config file parse or validation failure. Message carries the offending
/// key and, where known, the line number.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mdiqkd
