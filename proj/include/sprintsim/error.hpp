#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sprintsim
{
    // Machine-readable failure categories. The names are part of the wire
    // contract (HTTP error bodies and the C API status names).
    enum class ErrorCode
    {
        Validation,
        Configuration,
        Phase,
        SpecialistMismatch,
        Lifecycle,
        OvertimeCap,
        Dependency,
        Absent,
        NotFound,
        Integrity,
        Auth,
        Format,
        Conflict,
        NoSolution,
        Usage,
        Io,
        Internal,
    };

    std::string_view error_code_name(ErrorCode code) noexcept;

    class SimError : public std::runtime_error
    {
    public:
        SimError(ErrorCode code, const std::string &message)
            : std::runtime_error(message), m_code(code) {}

        ErrorCode code() const noexcept { return m_code; }

    private:
        ErrorCode m_code;
    };
}
