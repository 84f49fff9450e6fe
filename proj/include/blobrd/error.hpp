#pragma once

#include <stdexcept>
#include <string>

namespace blobrd
{

/// Invalid configuration, grid, blob set or input file.
class ConfigError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Right-hand side outside the range of a singular operator.
class SolvabilityError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

}  // namespace blobrd
