// Copyright (C) 2026 The deskdiff Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deskdiff {

// Invalid argument or configuration value.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (files, manifests, tensors).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A callee broke its interface contract, e.g. a network returned the wrong shape.
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Sigma sequence is not strictly decreasing where it must be.
class ScheduleOrderError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// Schedule transformation applied to an input that already has it.
class IdempotenceError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

class TrainingError : public std::runtime_error {
public:
    TrainingError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace deskdiff
