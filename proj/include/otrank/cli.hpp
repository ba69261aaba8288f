#pragma once

// Command-line front end. Results go to `out`, logs and errors to `err`.

#include <ostream>
#include <string>
#include <vector>

namespace otrank::cli {

enum ExitCode : int {
    kNoReject = 0,
    kReject = 10,
    kUsage = 64,     // bad flags or arguments
    kDataError = 65, // unreadable input, ties, dimension mismatch
    kInternal = 70,  // numerical failure
    kIoError = 74,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int main_entry(int argc, char** argv);

}  // namespace otrank::cli
