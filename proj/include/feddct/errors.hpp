#pragma once

#include <stdexcept>
#include <string>

namespace feddct {

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A configuration field violates its constraint. `field()` names the first offending key.
class InvalidConfig : public Error
{
public:
    InvalidConfig(std::string field, std::string reason)
        : Error("invalid config field '" + field + "': " + reason)
        , field_(std::move(field))
        , reason_(std::move(reason))
    {
    }

    const std::string& field() const noexcept { return field_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

class UnknownStream : public Error
{
public:
    explicit UnknownStream(const std::string& name) : Error("unknown random stream '" + name + "'") {}
};

class InsufficientSamples : public Error
{
public:
    explicit InsufficientSamples(int label)
        : Error("class " + std::to_string(label) + " has too few samples for the requested partition")
        , label_(label)
    {
    }

    int label() const noexcept { return label_; }

private:
    int label_;
};

class IndivisibleGroups : public Error
{
public:
    using Error::Error;
};

/// Loss or gradient left the finite range during local training.
class NonFinite : public Error
{
public:
    using Error::Error;
};

class EmptyAggregation : public Error
{
public:
    EmptyAggregation() : Error("aggregation over an empty update list") {}
};

class EmptyRound : public Error
{
public:
    EmptyRound() : Error("no eligible participants for this round") {}
};

class IncompatibleConfigs : public Error
{
public:
    using Error::Error;
};

class IoError : public Error
{
public:
    using Error::Error;
};

} // namespace feddct
