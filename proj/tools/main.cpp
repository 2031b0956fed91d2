#include "cmcflow/cli.hpp"

int main(int argc, char** argv) { return cmcflow::cli::dispatch(argc, argv); }
