#pragma once

#include <stdexcept>

namespace copulse {

// Shared failure taxonomy. The CLI maps ConfigError to exit code 2 and every
// other copulse::Error to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonCoprime : Error { using Error::Error; };
struct BadOrder : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NotPSD : Error { using Error::Error; };
struct BadBandwidth : Error { using Error::Error; };
struct SingularGram : Error { using Error::Error; };
struct SingularCore : Error { using Error::Error; };
struct RankTooLarge : Error { using Error::Error; };
struct Empty : Error { using Error::Error; };
struct BadScene : Error { using Error::Error; };
struct UnsupportedSpacing : Error { using Error::Error; };
struct Singular : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace copulse
