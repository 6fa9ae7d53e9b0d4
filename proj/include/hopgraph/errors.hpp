#pragma once

#include <stdexcept>
#include <string>

namespace hopgraph {

// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Embedding dimensions disagree (mixing dims in one graph is a hard error).
class DimensionError : public Error {
public:
    using Error::Error;
};

// A lookup by id failed (visit counter, vertex map, ...).
class KeyError : public Error {
public:
    using Error::Error;
};

// An external provider (embedding / chat endpoint) failed after retries.
// `status` carries the last HTTP status, or 0 for transport-level failures.
class ProviderError : public Error {
public:
    explicit ProviderError(const std::string& what, int status = 0)
        : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_ = 0;
};

// Query simulation for a passage could not be completed.
class SimulationError : public Error {
public:
    using Error::Error;
};

// A passage id already exists in the graph.
class IdConflictError : public Error {
public:
    using Error::Error;
};

// Archive format version is not supported by this build.
class VersionError : public Error {
public:
    using Error::Error;
};

// Archive payload failed its checksum (truncation or corruption).
class ChecksumError : public Error {
public:
    using Error::Error;
};

// Evaluation input violates a precondition (e.g. empty relevant set).
class EvalInputError : public Error {
public:
    using Error::Error;
};

// Bad configuration file or option value.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Corpus or dataset file missing or malformed.
class CorpusError : public Error {
public:
    using Error::Error;
};

} // namespace hopgraph
