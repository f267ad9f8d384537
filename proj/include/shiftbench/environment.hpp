#pragma once

// Maps (time, season, weather) domain labels to concrete shading parameters.

#include <string>

#include <json.hpp>

#include "common.hpp"
#include "geometry.hpp"

namespace shiftbench {

enum class Particles { none, rain, snow };

inline std::string to_string(Particles p) {
  switch (p) {
    case Particles::none: return "none";
    case Particles::rain: return "rain";
    case Particles::snow: return "snow";
  }
  return "?";
}

struct EnvironmentSpec {
  std::string time_of_day = "day";
  std::string season = "spring-summer";
  std::string weather = "clear";

  Vec3 sun_dir{0.3, 0.8, 0.5};  // unit, pointing toward the light
  Vec3 light_color{1, 1, 1};
  double key_intensity = 1.0;
  double ambient = 0.35;
  Vec3 sky_top{0.35, 0.6, 0.95};
  Vec3 sky_horizon{0.75, 0.85, 0.98};
  Vec3 fog_color{0.8, 0.8, 0.8};
  double fog_density = 0.0;  // per world unit of view depth
  Particles particles = Particles::none;
  int particle_count = 0;
  std::uint64_t particle_seed = 0;
  Vec3 particle_color{1, 1, 1};
  Vec3 ground_albedo{0.3, 0.55, 0.22};
  Vec3 foliage{0.2, 0.5, 0.15};
  Vec3 grade{1, 1, 1};  // final per-channel color grade

  nlohmann::json to_json() const {
    auto v = [](const Vec3& c) { return nlohmann::json::array({c.x, c.y, c.z}); };
    return {{"time_of_day", time_of_day}, {"season", season}, {"weather", weather},
            {"sun_dir", v(sun_dir)}, {"light_color", v(light_color)},
            {"key_intensity", key_intensity}, {"ambient", ambient},
            {"sky_top", v(sky_top)}, {"sky_horizon", v(sky_horizon)},
            {"fog_color", v(fog_color)}, {"fog_density", fog_density},
            {"particles", to_string(particles)}, {"particle_count", particle_count},
            {"particle_seed", particle_seed}, {"particle_color", v(particle_color)},
            {"ground_albedo", v(ground_albedo)}, {"foliage", v(foliage)},
            {"grade", v(grade)}};
  }
};

/// Deterministic parameter set for one (time, season, weather) triple and
/// seed. Throws on labels it has no rendition for, and on snowy outside
/// winter.
inline EnvironmentSpec derive_environment(const std::string& time_of_day,
                                          const std::string& season,
                                          const std::string& weather,
                                          std::uint64_t seed) {
  Rng rng(derive_seed(seed, {0xe7u}));
  EnvironmentSpec env;
  env.time_of_day = time_of_day;
  env.season = season;
  env.weather = weather;

  const double azimuth = rng.uniform(0, 2 * kPi);
  const double elevation = deg2rad(rng.uniform(35, 65));
  env.sun_dir = normalize({std::cos(elevation) * std::cos(azimuth), std::sin(elevation),
                           std::cos(elevation) * std::sin(azimuth)});

  if (time_of_day == "day") {
    env.key_intensity = rng.uniform(0.9, 1.1);
    env.light_color = {1.0, 0.97, 0.9};
    env.ambient = 0.35;
    env.sky_top = {0.32, 0.56, 0.92};
    env.sky_horizon = {0.74, 0.84, 0.97};
  } else if (time_of_day == "night") {
    env.key_intensity = rng.uniform(0.12, 0.18);
    env.light_color = {0.6, 0.7, 1.0};
    env.ambient = 0.07;
    env.sky_top = {0.01, 0.015, 0.05};
    env.sky_horizon = {0.04, 0.06, 0.12};
  } else {
    throw Error(concat("no rendition for time of day '", time_of_day, "'"));
  }
  const double night = time_of_day == "night" ? 0.18 : 1.0;

  if (season == "spring-summer") {
    env.ground_albedo = {0.30, 0.55, 0.22};
    env.foliage = {0.18, 0.48, 0.14};
    env.grade = {1.0, 1.02, 0.98};
  } else if (season == "autumn") {
    env.ground_albedo = {0.55, 0.42, 0.22};
    env.foliage = {0.85, 0.45, 0.10};
    env.grade = {1.08, 1.0, 0.88};
  } else if (season == "winter") {
    env.ground_albedo = {0.62, 0.64, 0.62};
    env.foliage = {0.36, 0.30, 0.25};
    env.grade = {0.93, 0.97, 1.07};
  } else {
    throw Error(concat("no rendition for season '", season, "'"));
  }

  if (weather == "clear") {
    env.fog_density = 0.004;
    env.fog_color = env.sky_horizon;
  } else if (weather == "sandstorm") {
    env.fog_density = rng.uniform(0.09, 0.14);
    env.fog_color = Vec3{0.76, 0.60, 0.38} * night;
    env.sky_top = env.sky_horizon = env.fog_color;
    env.key_intensity *= 0.6;
    env.light_color = env.light_color.mul({1.0, 0.85, 0.65});
  } else if (weather == "foggy") {
    env.fog_density = rng.uniform(0.11, 0.17);
    env.fog_color = Vec3{0.80, 0.82, 0.84} * night;
    env.sky_top = env.sky_horizon = env.fog_color;
    env.key_intensity *= 0.55;
  } else if (weather == "rainy") {
    env.fog_density = 0.03;
    env.fog_color = Vec3{0.52, 0.55, 0.58} * night;
    env.sky_top = Vec3{0.42, 0.45, 0.5} * night;
    env.sky_horizon = Vec3{0.56, 0.58, 0.62} * night;
    env.key_intensity *= 0.45;
    env.particles = Particles::rain;
    env.particle_count = static_cast<int>(rng.uniform(600, 900));
    env.particle_color = Vec3{0.78, 0.8, 0.85} * (night < 1 ? 0.35 : 1.0);
  } else if (weather == "snowy") {
    if (season != "winter")
      throw Error(concat("snowy weather requires winter, got '", season, "'"));
    env.fog_density = 0.02;
    env.fog_color = Vec3{0.85, 0.87, 0.9} * night;
    env.sky_top = Vec3{0.7, 0.74, 0.8} * night;
    env.sky_horizon = Vec3{0.86, 0.88, 0.92} * night;
    env.key_intensity *= 0.8;
    env.ground_albedo = lerp(env.ground_albedo, {0.95, 0.95, 0.97}, 0.85);
    env.foliage = lerp(env.foliage, {0.92, 0.92, 0.95}, 0.6);
    env.particles = Particles::snow;
    env.particle_count = static_cast<int>(rng.uniform(700, 1100));
    env.particle_color = Vec3{1, 1, 1} * (night < 1 ? 0.45 : 1.0);
  } else {
    throw Error(concat("no rendition for weather '", weather, "'"));
  }
  env.particle_seed = rng.next();
  return env;
}

}  // namespace shiftbench
