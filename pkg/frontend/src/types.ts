/** Wire formats of the gallery service API. */

export interface SolutionSummary {
  id: string;
  skeleton: string;
  created_at: string;
  mechanistic_fitness: number;
  mean: number;
  count: number;
  class: string; // good | poor | unrated
}

export interface SolutionPage {
  items: SolutionSummary[];
  next_cursor: string | null;
}

export interface CrowdScore {
  mean: number;
  count: number;
  class: string;
}

/** Frame layout: frames[k][body] = [x, y, angle] in world meters/radians. */
export interface TraceDoc {
  schema_version: number;
  skeleton_name: string;
  dt: number;
  body_half_extents: Array<[number, number]>;
  ground_y: number;
  frames: number[][][];
  terminated_early: boolean;
  termination_frame: number | null;
}

export interface SolutionDetail {
  id: string;
  skeleton_name: string;
  mechanistic_fitness: number;
  created_at: string;
  optimizer: { name: string };
}
