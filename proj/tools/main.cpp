#include "krawtex/cli.hpp"

int main(int argc, char** argv)
{
  return krawtex::cli::dispatch(argc, argv);
}
