from abc import abstractmethod

from beam_tracker.imaging import DenoiseConfig, Frame, denoise_mask


class FrameDenoiser:
    """Cleans a cropped frame before the per-row maxima are taken."""

    def __init__(self, config=None):
        self.config = config or {}

    @abstractmethod
    def denoise(self, frame: Frame) -> Frame:
        """
        Return a frame of the same size; the input is never modified.
        """


class NeighborhoodMaskDenoiser(FrameDenoiser):
    """ zero every pixel whose kernel neighborhood is darker than the threshold """

    def __init__(self, config=None):
        super().__init__(config)
        self.settings = DenoiseConfig(
            kernel_rows=int(self.config.get("kernel_rows", 7)),
            kernel_cols=int(self.config.get("kernel_cols", 3)),
            mask_threshold=int(self.config.get("mask_threshold", 20)))

    def denoise(self, frame: Frame) -> Frame:
        return denoise_mask(frame, self.settings)


class PassthroughDenoiser(FrameDenoiser):
    def denoise(self, frame: Frame) -> Frame:
        return frame
