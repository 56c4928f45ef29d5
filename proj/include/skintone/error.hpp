#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skintone {

/// Machine-readable failure causes. Per-image causes become skip reasons in
/// the record stream; the rest are fatal for the operation that raised them.
enum class ErrorCode {
  invalid_argument,
  validation,
  io,
  image_decode_error,
  sidecar_parse_error,
  sidecar_image_mismatch,
  no_face_detected,
  no_background_reference,
  insufficient_skin_area,
  insufficient_pixels,
};

inline std::string_view reason_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::validation: return "validation_error";
    case ErrorCode::io: return "io_error";
    case ErrorCode::image_decode_error: return "image_decode_error";
    case ErrorCode::sidecar_parse_error: return "sidecar_parse_error";
    case ErrorCode::sidecar_image_mismatch: return "sidecar_image_mismatch";
    case ErrorCode::no_face_detected: return "no_face_detected";
    case ErrorCode::no_background_reference: return "no_background_reference";
    case ErrorCode::insufficient_skin_area: return "insufficient_skin_area";
    case ErrorCode::insufficient_pixels: return "insufficient_pixels";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view reason() const noexcept { return reason_string(code_); }

 private:
  ErrorCode code_;
};

}  // namespace skintone
