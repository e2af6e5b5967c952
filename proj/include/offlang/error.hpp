// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace offlang {

// Every error thrown by the library belongs to one of three classes. The
// CLI maps them onto exit codes 1, 2 and 3.
enum class ErrorClass { config = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what)
        : std::runtime_error(what), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what)
        : Error(ErrorClass::config, "config error: " + what) {}
};

class InvalidTarget : public Error {
public:
    explicit InvalidTarget(const std::string& what)
        : Error(ErrorClass::config, "invalid feature target: " + what) {}
};

class InvalidPrior : public ConfigError {
public:
    explicit InvalidPrior(double p)
        : ConfigError("class prior must lie strictly between 0 and 1, got " + std::to_string(p)) {}
};

class NegativeFloodLevel : public ConfigError {
public:
    explicit NegativeFloodLevel(double b)
        : ConfigError("flood level must be non-negative, got " + std::to_string(b)) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what)
        : Error(ErrorClass::data, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what)
        : Error(ErrorClass::numeric, what) {}
};

class IoError : public DataError {
public:
    explicit IoError(const std::string& path)
        : DataError("cannot access file: " + path), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Data errors tied to a 1-based line of an input file; line 0 means the
// value did not come from a file.
class LineError : public DataError {
public:
    LineError(const std::string& kind, std::size_t line, const std::string& detail)
        : DataError(kind + (line > 0 ? " at line " + std::to_string(line) : std::string{}) +
                    (detail.empty() ? std::string{} : ": " + detail)),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MalformedRow : public LineError {
public:
    MalformedRow(std::size_t line, const std::string& detail = {})
        : LineError("malformed row", line, detail) {}
};

class UnknownLabel : public LineError {
public:
    UnknownLabel(std::size_t line, const std::string& raw)
        : LineError("unknown label", line, "'" + raw + "'"), raw_(raw) {}
    explicit UnknownLabel(const std::string& raw) : UnknownLabel(0, raw) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

class DimMismatch : public LineError {
public:
    DimMismatch(std::size_t line, const std::string& detail)
        : LineError("dimension mismatch", line, detail) {}
};

class EmptySource : public DataError {
public:
    explicit EmptySource(const std::string& source)
        : DataError("source '" + source + "' yields no documents") {}
};

class EmptyCorpus : public DataError {
public:
    EmptyCorpus() : DataError("cannot fit on an empty corpus") {}
};

class SingleClassCorpus : public DataError {
public:
    SingleClassCorpus() : DataError("training data must contain both OFF and NOT") {}
};

class LengthMismatch : public DataError {
public:
    LengthMismatch(std::size_t a, std::size_t b)
        : DataError("length mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class DimensionMismatch : public NumericError {
public:
    DimensionMismatch(std::size_t expected, std::size_t got)
        : NumericError("dimension mismatch: expected " + std::to_string(expected) +
                       ", got " + std::to_string(got)) {}
};

class ShapeMismatch : public NumericError {
public:
    explicit ShapeMismatch(const std::string& what) : NumericError("shape mismatch: " + what) {}
};

class NonFiniteValue : public NumericError {
public:
    explicit NonFiniteValue(const std::string& where)
        : NumericError("non-finite value in " + where) {}
};

class NonScalarLoss : public NumericError {
public:
    NonScalarLoss() : NumericError("backward requires a scalar loss node") {}
};

}  // namespace offlang
