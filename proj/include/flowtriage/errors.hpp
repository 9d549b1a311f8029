#ifndef FLOWTRIAGE_ERRORS_HPP
#define FLOWTRIAGE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flowtriage {

// Base for all pipeline errors. Subcommands map ValidationError to exit
// code 1 and everything else to 2.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

struct MissingColumn : ValidationError {
    explicit MissingColumn(const std::string& name)
        : ValidationError("missing column in input header: " + name) {}
};

struct EmptyInput : ValidationError {
    explicit EmptyInput(const std::string& what)
        : ValidationError("empty input: " + what) {}
};

struct BadFraction : ValidationError {
    explicit BadFraction(double value)
        : ValidationError("fraction must lie in (0,1), got " + std::to_string(value)) {}
};

struct UnlabeledRecord : ValidationError {
    explicit UnlabeledRecord(const std::string& flow_id)
        : ValidationError("record without ground-truth label: " + flow_id) {}
};

struct EmptyWindow : Error {
    EmptyWindow() : Error("window has no flows") {}
    explicit EmptyWindow(int index)
        : Error("window " + std::to_string(index) + " has no flows") {}
};

struct DimMismatch : Error {
    explicit DimMismatch(const std::string& detail)
        : Error("dimension mismatch: " + detail) {}
};

struct TooFewRows : ValidationError {
    explicit TooFewRows(long n)
        : ValidationError("need at least 2 rows to fit statistics, got " + std::to_string(n)) {}
};

struct EmptyTrainingSet : ValidationError {
    EmptyTrainingSet() : ValidationError("training set is empty") {}
};

struct SteppedPastEnd : Error {
    SteppedPastEnd() : Error("step() called on terminal environment") {}
    SteppedPastEnd(long t, long horizon)
        : Error("step() called on terminal environment: t=" + std::to_string(t) +
                " horizon=" + std::to_string(horizon)) {}
};

struct TooFewWindows : ValidationError {
    TooFewWindows(long have, long need)
        : ValidationError("need at least " + std::to_string(need) +
                          " windows for the requested folds, got " + std::to_string(have)) {}
};

struct LengthMismatch : Error {
    LengthMismatch(long a, long b)
        : Error("aligned sequences differ in length: " + std::to_string(a) +
                " vs " + std::to_string(b)) {}
    explicit LengthMismatch(const std::string& detail)
        : Error("aligned sequences differ in length: " + detail) {}
};

struct UnknownToken : Error {
    explicit UnknownToken(const std::string& token)
        : Error("pseudonym token not present in map: " + token) {}
};

struct BackendUnavailable : Error {
    explicit BackendUnavailable(const std::string& detail)
        : Error("analyst backend unavailable: " + detail) {}
};

struct MissingArtifact : ValidationError {
    explicit MissingArtifact(const std::string& path)
        : ValidationError("required artifact not found: " + path) {}
};

}  // namespace flowtriage

#endif  // FLOWTRIAGE_ERRORS_HPP
