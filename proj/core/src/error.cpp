#include "vizgen/error.hpp"

#include <array>
#include <utility>

namespace vizgen {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 36> kNames{{
    {ErrorCode::MissingNode, "MissingNode"},
    {ErrorCode::DigestMismatch, "DigestMismatch"},
    {ErrorCode::NoConnection, "NoConnection"},
    {ErrorCode::NoChart, "NoChart"},
    {ErrorCode::Timeout, "Timeout"},
    {ErrorCode::SchemaViolation, "SchemaViolation"},
    {ErrorCode::AdapterUnavailable, "AdapterUnavailable"},
    {ErrorCode::ConnectionFailed, "ConnectionFailed"},
    {ErrorCode::PermissionDenied, "PermissionDenied"},
    {ErrorCode::NoTables, "NoTables"},
    {ErrorCode::GenerationFailed, "GenerationFailed"},
    {ErrorCode::NoUsableColumns, "NoUsableColumns"},
    {ErrorCode::ParseError, "ParseError"},
    {ErrorCode::MultipleStatements, "MultipleStatements"},
    {ErrorCode::ReadOnlyViolation, "ReadOnlyViolation"},
    {ErrorCode::UnknownTable, "UnknownTable"},
    {ErrorCode::UnknownColumn, "UnknownColumn"},
    {ErrorCode::ExecutionTimeout, "ExecutionTimeout"},
    {ErrorCode::ExecutionFailed, "ExecutionFailed"},
    {ErrorCode::EmptyAfterCleaning, "EmptyAfterCleaning"},
    {ErrorCode::NotPlottable, "NotPlottable"},
    {ErrorCode::ChannelUnsatisfiable, "ChannelUnsatisfiable"},
    {ErrorCode::NothingToAnalyze, "NothingToAnalyze"},
    {ErrorCode::NoFindings, "NoFindings"},
    {ErrorCode::Unparseable, "Unparseable"},
    {ErrorCode::IllegalPath, "IllegalPath"},
    {ErrorCode::BadValue, "BadValue"},
    {ErrorCode::IncompatibleMark, "IncompatibleMark"},
    {ErrorCode::StorageFailure, "StorageFailure"},
    {ErrorCode::UnknownSession, "UnknownSession"},
    {ErrorCode::TurnInProgress, "TurnInProgress"},
    {ErrorCode::WriteAccessRequested, "WriteAccessRequested"},
    {ErrorCode::UnknownChart, "UnknownChart"},
    {ErrorCode::UnsupportedFormat, "UnsupportedFormat"},
    {ErrorCode::InvalidArgument, "InvalidArgument"},
    {ErrorCode::Internal, "Internal"},
}};

std::string compose(ErrorCode code, const std::string& message,
                    const std::string& subject) {
  std::string out{to_string(code)};
  if (!subject.empty()) out += "(" + subject + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Internal";
}

ErrorCode error_code_from_string(std::string_view name) {
  for (const auto& [c, n] : kNames) {
    if (n == name) return c;
  }
  return ErrorCode::Internal;
}

Error::Error(ErrorCode code, std::string message, std::string subject)
    : std::runtime_error(compose(code, message, subject)),
      code_(code),
      message_(std::move(message)),
      subject_(std::move(subject)) {}

}  // namespace vizgen
