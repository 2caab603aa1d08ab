/** Scale captions; defaults in English, overridable via a JSON locale file. */
export const DEFAULT_SCALE: Record<string, string> = {
  "0": "none",
  "1": "mild",
  "2": "present",
  "3": "strong",
  "4": "extreme",
};

export function applyLocale(
  base: Record<string, string>,
  overrides: Partial<Record<string, string>>,
): Record<string, string> {
  const merged = { ...base };
  for (const [value, caption] of Object.entries(overrides)) {
    if (value in merged && typeof caption === "string" && caption.length > 0) {
      merged[value] = caption;
    }
  }
  return merged;
}

export async function loadLocale(url: string): Promise<Record<string, string>> {
  const response = await fetch(url);
  if (!response.ok) return DEFAULT_SCALE;
  return applyLocale(DEFAULT_SCALE, await response.json());
}
