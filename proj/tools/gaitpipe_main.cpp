#include "gaitpipe/cli.hpp"

int main(int argc, char** argv) { return gaitpipe::cli::dispatch(argc, argv); }
