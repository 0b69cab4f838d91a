/*
 * Copyright 2026 The mgvga Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*!
  \file subprocess.hpp
  \brief Runs an external program with captured output and a wall-clock timeout
*/

#pragma once

#include <chrono>
#include <csignal>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace mgvga
{

struct process_result
{
  int exit_code{ -1 };
  bool timed_out{ false };
  bool spawn_failed{ false };
  std::string output; /* stdout and stderr interleaved */
};

/*! \brief Resolves `program` against PATH unless it already contains a slash. */
inline std::filesystem::path find_executable( std::string const& program )
{
  namespace fs = std::filesystem;
  if ( program.find( '/' ) != std::string::npos )
  {
    return ( fs::exists( program ) && ::access( program.c_str(), X_OK ) == 0 ) ? fs::path( program ) : fs::path();
  }
  const char* path = std::getenv( "PATH" );
  if ( path == nullptr )
  {
    return {};
  }
  std::string p( path );
  std::size_t start = 0;
  while ( start <= p.size() )
  {
    const auto end = p.find( ':', start );
    const auto dir = p.substr( start, end == std::string::npos ? std::string::npos : end - start );
    if ( !dir.empty() )
    {
      const auto candidate = fs::path( dir ) / program;
      if ( fs::exists( candidate ) && ::access( candidate.c_str(), X_OK ) == 0 )
      {
        return candidate;
      }
    }
    if ( end == std::string::npos )
    {
      break;
    }
    start = end + 1;
  }
  return {};
}

inline process_result run_process( std::vector<std::string> const& argv, std::chrono::milliseconds timeout,
                                   std::filesystem::path const& working_dir = {} )
{
  process_result result;
  if ( argv.empty() )
  {
    result.spawn_failed = true;
    return result;
  }

  int pipefd[2];
  if ( ::pipe( pipefd ) != 0 )
  {
    throw std::runtime_error( "pipe() failed" );
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init( &actions );
  posix_spawn_file_actions_addclose( &actions, pipefd[0] );
  posix_spawn_file_actions_adddup2( &actions, pipefd[1], STDOUT_FILENO );
  posix_spawn_file_actions_adddup2( &actions, pipefd[1], STDERR_FILENO );
  posix_spawn_file_actions_addclose( &actions, pipefd[1] );
  if ( !working_dir.empty() )
  {
    posix_spawn_file_actions_addchdir_np( &actions, working_dir.c_str() );
  }

  std::vector<char*> args;
  for ( auto const& a : argv )
  {
    args.push_back( const_cast<char*>( a.c_str() ) );
  }
  args.push_back( nullptr );

  pid_t pid = 0;
  const int rc = ::posix_spawnp( &pid, args[0], &actions, nullptr, args.data(), environ );
  posix_spawn_file_actions_destroy( &actions );
  ::close( pipefd[1] );
  if ( rc != 0 )
  {
    ::close( pipefd[0] );
    result.spawn_failed = true;
    return result;
  }

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char buffer[4096];
  bool open = true;
  while ( open )
  {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>( deadline - std::chrono::steady_clock::now() );
    if ( remaining.count() <= 0 )
    {
      result.timed_out = true;
      ::kill( pid, SIGKILL );
      break;
    }
    pollfd pfd{ pipefd[0], POLLIN, 0 };
    const int ready = ::poll( &pfd, 1, static_cast<int>( std::min<long long>( remaining.count(), 100 ) ) );
    if ( ready > 0 )
    {
      const auto n = ::read( pipefd[0], buffer, sizeof( buffer ) );
      if ( n > 0 )
      {
        result.output.append( buffer, static_cast<std::size_t>( n ) );
      }
      else
      {
        open = false;
      }
    }
  }
  ::close( pipefd[0] );

  int status = 0;
  ::waitpid( pid, &status, 0 );
  if ( !result.timed_out )
  {
    if ( WIFEXITED( status ) )
    {
      result.exit_code = WEXITSTATUS( status );
    }
    else if ( WIFSIGNALED( status ) )
    {
      result.exit_code = 128 + WTERMSIG( status );
    }
  }
  return result;
}

} // namespace mgvga
