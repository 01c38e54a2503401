/** Class palette: one entry per dataset class with a stable colour and,
 * for the first nine classes, a 1..9 keyboard shortcut. */

export interface ClassEntry {
  id: number;
  name: string;
  color: string;
  shortcut: string | null;
}

// Fixed palette; classes beyond its length cycle (colours repeat only
// after eight classes, more than the reference dataset needs).
export const PALETTE_COLORS = [
  "#e6194b",
  "#3cb44b",
  "#4363d8",
  "#f58231",
  "#911eb4",
  "#42d4f4",
  "#f032e6",
  "#bfef45",
] as const;

export function classPalette(names: readonly string[]): ClassEntry[] {
  return names.map((name, id) => ({
    id,
    name,
    color: PALETTE_COLORS[id % PALETTE_COLORS.length],
    shortcut: id < 9 ? String(id + 1) : null,
  }));
}
