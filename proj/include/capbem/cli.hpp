#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace capbem::cli {

// Process exit codes. Every failure also prints a "caperror/1" JSON object
// on the output stream; successful commands print only complete documents.
enum ExitCode : int {
    kOk = 0,
    kUsage = 2,             // bad flags, values out of range, wrong mesh source
    kIo = 3,                // unreadable input, unwritable output
    kMeshParse = 4,         // malformed OBJ/STL
    kMeshInvalid = 5,       // not watertight, degenerate or bad indices
    kNumerical = 6,         // assembly/solve failure, matrix not SPD
    kInput = 7,             // malformed or asymmetric symform/1 input
    kPrincipleMismatch = 8, // verify-principle result contradicts the classification
    kInternal = 70,
};

// Runs one command line (without the program name). Reports go to `out`,
// help and human diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace capbem::cli
