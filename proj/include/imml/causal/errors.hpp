#pragma once

#include <stdexcept>
#include <string>

namespace imml::causal {

/// Base class for every error raised by the causal engine.
class CausalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CycleDetected : public CausalError {
public:
    using CausalError::CausalError;
};

class UnknownNode : public CausalError {
public:
    explicit UnknownNode(const std::string& name)
        : CausalError("unknown node '" + name + "'"), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class InvalidGraph : public CausalError {
public:
    using CausalError::CausalError;
};

class OverlappingSets : public CausalError {
public:
    using CausalError::CausalError;
};

class UnobservedVariable : public CausalError {
public:
    using CausalError::CausalError;
};

/// A d_a node handed to the beta criterion or adjustment is not observable.
class UnobservedDA : public UnobservedVariable {
public:
    using UnobservedVariable::UnobservedVariable;
};

class UnknownVariable : public CausalError {
public:
    using CausalError::CausalError;
};

class InvalidScm : public CausalError {
public:
    using CausalError::CausalError;
};

class ValueOutOfDomain : public CausalError {
public:
    using CausalError::CausalError;
};

class DomainTooLarge : public CausalError {
public:
    using CausalError::CausalError;
};

class CriterionViolated : public CausalError {
public:
    using CausalError::CausalError;
};

class TopologyMismatch : public CausalError {
public:
    using CausalError::CausalError;
};

}  // namespace imml::causal
