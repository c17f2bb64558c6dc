#pragma once

#include <stdexcept>
#include <string>

namespace lpsim {

enum class ErrorCode {
  AlreadyRegistered,
  OverlappingLifetime,
  BadSignature,
  Revoked,
  BadParameters,
  TicketReplay,
  BadSelfSignature,
  CountMismatch,
  UnknownPC,
  UnknownNode,
  UnknownMessageKind,
  DecryptFailure,
  ExpiredPC,
  RevokedPC,
  ExpiredServingPC,
  BadRegion,
  UnknownEpoch,
  WrongRegion,
  BadReporterSignature,
  RevokedReporter,
  InvalidConfig,
  TraceParseError,
};

const char* error_code_name(ErrorCode c);

struct SchemeError : std::runtime_error {
  SchemeError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code(code) {}
  ErrorCode code;
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::AlreadyRegistered: return "AlreadyRegistered";
    case ErrorCode::OverlappingLifetime: return "OverlappingLifetime";
    case ErrorCode::BadSignature: return "BadSignature";
    case ErrorCode::Revoked: return "Revoked";
    case ErrorCode::BadParameters: return "BadParameters";
    case ErrorCode::TicketReplay: return "TicketReplay";
    case ErrorCode::BadSelfSignature: return "BadSelfSignature";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::UnknownPC: return "UnknownPC";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownMessageKind: return "UnknownMessageKind";
    case ErrorCode::DecryptFailure: return "DecryptFailure";
    case ErrorCode::ExpiredPC: return "ExpiredPC";
    case ErrorCode::RevokedPC: return "RevokedPC";
    case ErrorCode::ExpiredServingPC: return "ExpiredServingPC";
    case ErrorCode::BadRegion: return "BadRegion";
    case ErrorCode::UnknownEpoch: return "UnknownEpoch";
    case ErrorCode::WrongRegion: return "WrongRegion";
    case ErrorCode::BadReporterSignature: return "BadReporterSignature";
    case ErrorCode::RevokedReporter: return "RevokedReporter";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TraceParseError: return "TraceParseError";
  }
  return "Unknown";
}

}  // namespace lpsim
