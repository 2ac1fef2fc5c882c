#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vizgen {

// Every failure that can cross a module boundary carries one of these codes.
// The names are part of the wire format (ResponseBundle.errors, HTTP bodies).
enum class ErrorCode {
  // workflow
  MissingNode,
  DigestMismatch,
  NoConnection,
  NoChart,
  // providers
  Timeout,
  SchemaViolation,
  AdapterUnavailable,
  // sql
  ConnectionFailed,
  PermissionDenied,
  NoTables,
  GenerationFailed,
  NoUsableColumns,
  ParseError,
  MultipleStatements,
  ReadOnlyViolation,
  UnknownTable,
  UnknownColumn,
  ExecutionTimeout,
  ExecutionFailed,
  // viz
  EmptyAfterCleaning,
  NotPlottable,
  ChannelUnsatisfiable,
  // analysis / explanation
  NothingToAnalyze,
  NoFindings,
  // customizer
  Unparseable,
  IllegalPath,
  BadValue,
  IncompatibleMark,
  // service
  StorageFailure,
  UnknownSession,
  TurnInProgress,
  WriteAccessRequested,
  UnknownChart,
  UnsupportedFormat,
  InvalidArgument,
  Internal,
};

std::string_view to_string(ErrorCode code);
ErrorCode error_code_from_string(std::string_view name);

class Error : public std::runtime_error {
 public:
  // `subject` is the parenthesised argument of codes such as
  // ReadOnlyViolation(DELETE) or UnknownTable(ghosts); empty when unused.
  Error(ErrorCode code, std::string message, std::string subject = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::string subject_;
};

}  // namespace vizgen
