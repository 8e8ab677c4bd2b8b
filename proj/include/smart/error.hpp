// Copyright (c) 2026 The smartft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace smart {

/// Raised when a caller breaks an operation's precondition (shape mismatch,
/// non-simplex input, negative variance, ...). Indicates a programming error.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised on bad user-supplied data: out-of-range labels or token ids,
/// malformed dataset records, invalid configuration values.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a checkpoint or dataset file cannot be read back.
class LoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smart
