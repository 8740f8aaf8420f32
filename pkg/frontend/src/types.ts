/**
 * Shared types for the playbook builder: the draft graph being edited and
 * the JSON shapes exchanged with the recommendation service.
 */

export const START_MODULE = "START";
export const EOP = "EOP";

export interface DraftNode {
  id: string;
  module: string;
}

/** The playbook under construction; same shape as the corpus file format. */
export interface Draft {
  start: string;
  nodes: DraftNode[];
  edges: [string, string][];
}

export interface ModuleInfo {
  id: string;
  name: string;
  is_eop: boolean;
}

export interface RecommendationEntry {
  candidate: string;
  score: number;
  rank: number;
}

export interface RecommendResponse {
  recommendations: RecommendationEntry[];
  eop_rank: number;
  eop_score: number;
  warnings: string[];
}

export interface RecommendRequest {
  alert_keys: string[];
  playbook: Draft;
  current_node: string;
  k: number;
}

export interface HealthResponse {
  status: string;
  bundle: string | null;
}

export interface ApiError {
  code: string;
  message: string;
}
