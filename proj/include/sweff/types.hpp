// Copyright 2026 The sweff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sweff {

// Byte and rate quantities are carried as doubles. Every volume the model
// produces is a dyadic rational, so ledger sums stay exact well past the
// sizes exercised by the oracle tests.
using Bytes = double;
using Rate = double;     // bytes per second
using Seconds = double;

using GpuId = std::int32_t;
using NodeId = std::int32_t;
using PortId = std::int32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a pure computation (bad kind, bad participant count).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Accounting ledger that violates conservation or feasibility.
class LedgerError : public Error {
 public:
  using Error::Error;
};

class ConstructionError : public Error {
 public:
  using Error::Error;
};

class PlacementError : public Error {
 public:
  using Error::Error;
};

class RoutingError : public Error {
 public:
  using Error::Error;
};

// Workload and group layout that do not describe the same job.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sweff
