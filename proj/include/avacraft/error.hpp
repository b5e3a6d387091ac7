#pragma once

#include <stdexcept>
#include <string>

namespace ava {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
public:
    SchemaError(std::string field, std::string reason)
        : Error("schema error at '" + field + "': " + reason),
          field_(std::move(field)),
          reason_(std::move(reason)) {}
    const std::string& field() const { return field_; }
    const std::string& reason() const { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

class MissingClass : public Error {
public:
    explicit MissingClass(std::string name)
        : Error("unit class not in catalog: " + name), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class UnknownScenario : public Error {
public:
    explicit UnknownScenario(const std::string& id) : Error("unknown scenario: " + id) {}
};

class SpawnOverflow : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class OutOfArena : public Error {
public:
    using Error::Error;
};

class CannotTarget : public Error {
public:
    using Error::Error;
};

class UnknownClass : public Error {
public:
    explicit UnknownClass(const std::string& key) : Error("no knowledge entry for class: " + key) {}
};

class DanglingClass : public Error {
public:
    explicit DanglingClass(std::string name)
        : Error("knowledge references unknown class: " + name), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class BindError : public Error {
public:
    using Error::Error;
};

class CorruptReplay : public Error {
public:
    CorruptReplay(int last_good_step, const std::string& why)
        : Error("corrupt replay after step " + std::to_string(last_good_step) + ": " + why),
          last_good_step_(last_good_step) {}
    int last_good_step() const { return last_good_step_; }

private:
    int last_good_step_;
};

}  // namespace ava
