package liba

import (
	"unsafe"

	"example.com/liba/bits"
	"example.com/shared"
)

func Load(p *int) int {
	if p == nil {
		return shared.Zero() + bits.Width()
	}
	return *(*int)(unsafe.Pointer(p))
}
