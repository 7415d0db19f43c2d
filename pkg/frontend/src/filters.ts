/** Filter panel: validation and query-parameter construction. */

import type { FilterInputs } from "./types.js";

export interface FilterValidation {
  ok: boolean;
  errors: string[];
}

export function validateFilters(inputs: FilterInputs): FilterValidation {
  const errors: string[] = [];
  const depthMin = parseOptionalNumber(inputs.depthMin, "minimum depth", errors);
  const depthMax = parseOptionalNumber(inputs.depthMax, "maximum depth", errors);
  if (depthMin !== undefined && depthMax !== undefined && depthMin > depthMax) {
    errors.push("depth range is inverted");
  }
  const from = parseOptionalDate(inputs.from, "start time", errors);
  const to = parseOptionalDate(inputs.to, "end time", errors);
  if (from !== undefined && to !== undefined && from > to) {
    errors.push("time range is inverted");
  }
  return { ok: errors.length === 0, errors };
}

function parseOptionalNumber(
  raw: string | undefined,
  label: string,
  errors: string[],
): number | undefined {
  if (raw === undefined || raw.trim() === "") return undefined;
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    errors.push(`${label} is not a number`);
    return undefined;
  }
  return value;
}

function parseOptionalDate(
  raw: string | undefined,
  label: string,
  errors: string[],
): number | undefined {
  if (raw === undefined || raw.trim() === "") return undefined;
  const value = Date.parse(raw);
  if (Number.isNaN(value)) {
    errors.push(`${label} is not a valid timestamp`);
    return undefined;
  }
  return value;
}

/** Build /api/search parameters; call only after validateFilters passes. */
export function searchParams(query: string, k: number, filters: FilterInputs): URLSearchParams {
  const params = new URLSearchParams();
  params.set("q", query);
  params.set("k", String(k));
  const entries: Array<[string, string | undefined]> = [
    ["location", filters.location],
    ["from", filters.from],
    ["to", filters.to],
    ["depth_min", filters.depthMin],
    ["depth_max", filters.depthMax],
    ["species", filters.species],
    ["behavior", filters.behavior],
  ];
  for (const [name, value] of entries) {
    if (value !== undefined && value.trim() !== "") {
      params.set(name, value.trim());
    }
  }
  return params;
}

export function clearedFilters(): FilterInputs {
  return {};
}
