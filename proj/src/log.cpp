#include "mvst/log.hpp"

#include <iostream>
#include <utility>

namespace mvst {

namespace {

void stderr_sink(LogLevel level, std::string_view message)
{
    std::cerr << (level == LogLevel::warning ? "warning: " : "") << message << '\n';
}

LogSink& current_sink()
{
    static LogSink sink = stderr_sink;
    return sink;
}

} // namespace

LogSink set_log_sink(LogSink sink)
{
    return std::exchange(current_sink(), sink ? std::move(sink) : LogSink(stderr_sink));
}

void log_info(std::string_view message) { current_sink()(LogLevel::info, message); }

void log_warning(std::string_view message) { current_sink()(LogLevel::warning, message); }

} // namespace mvst
